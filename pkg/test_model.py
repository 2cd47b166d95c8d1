"""Tests für Modellparameter, Dispersion und Phasengeometrie."""
import math

import numpy as np
import pytest

from src.errors import InvalidParameters, OddN
from src.model import (CouplingParams, PolarField, classify_phase, dispersion, dispersion_table, momentum_grid,
                       polar_from_cartesian)


def _hermitian_pair(eta, k):
    a = math.sqrt(1.0 + eta * eta - 2.0 * eta * math.cos(k / 2.0))
    b = math.sqrt(1.0 + eta * eta + 2.0 * eta * math.cos(k / 2.0))
    return a, b


def test_polar_from_cartesian_origin():
    assert polar_from_cartesian(0.0, 0.0) == PolarField(0.0, 0.0)


def test_polar_from_cartesian_angle_range():
    polar = polar_from_cartesian(0.0, -1.0)
    assert polar.r == pytest.approx(1.0)
    assert polar.phi == pytest.approx(1.5 * math.pi)
    assert 0.0 <= polar_from_cartesian(1.0, -1e-300).phi < 2.0 * math.pi


def test_coupling_params_validation():
    with pytest.raises(OddN):
        CouplingParams(0.5, 0.1, N=3)
    with pytest.raises(InvalidParameters):
        CouplingParams(0.5, 0.1, J=0.0)
    with pytest.raises(InvalidParameters):
        CouplingParams(math.nan, 0.1)
    # OddN ist ebenfalls ein Parameterfehler
    assert issubclass(OddN, InvalidParameters)


def test_coupling_params_helpers():
    p = CouplingParams.from_polar(2.0, math.pi / 6, N=6, J=1.5)
    assert p.eta == pytest.approx(math.sqrt(3.0))
    assert p.xi == pytest.approx(1.0)
    assert p.polar.r == pytest.approx(2.0)
    assert p.mirrored().xi == pytest.approx(-1.0)
    moved = p.with_field(0.1, 0.2)
    assert (moved.eta, moved.xi, moved.N, moved.J) == (0.1, 0.2, 6, 1.5)


def test_momentum_grid_standard_sector():
    grid = momentum_grid(4)
    assert grid.paired == pytest.approx((math.pi / 4, 3 * math.pi / 4))
    assert grid.unpaired == ()
    assert len(momentum_grid(300).paired) == 150


def test_momentum_grid_odd_sector_keeps_unpaired_points():
    grid = momentum_grid(8, -1)
    assert grid.paired == pytest.approx((math.pi / 4, math.pi / 2, 3 * math.pi / 4))
    assert grid.unpaired == (0.0, math.pi)


def test_momentum_grid_rejects_odd_n():
    with pytest.raises(OddN):
        momentum_grid(5)
    with pytest.raises(InvalidParameters):
        momentum_grid(4, sector=0)


def test_dispersion_hermitian_closed_form():
    eta, k = 0.7, 1.1
    a, b = _hermitian_pair(eta, k)
    table = dispersion_table(k, CouplingParams(eta, 0.0))
    assert table[0] == pytest.approx(a + b)
    assert table[2] == pytest.approx(abs(a - b))
    assert table[8] == pytest.approx(b)
    assert table[10] == pytest.approx(a)


def test_dispersion_level_relations(sample_points):
    for k, p in sample_points:
        table = dispersion_table(k, p)
        np.testing.assert_allclose(table[1], -table[0])
        np.testing.assert_allclose(table[3], -table[2])
        np.testing.assert_array_equal(table[4:8], 0.0)
        np.testing.assert_allclose(table[12:16], [table[8], -table[8], table[10], -table[10]])


def test_dispersion_symmetries(sample_points):
    for k, p in sample_points:
        table = dispersion_table(k, p)
        np.testing.assert_allclose(table, dispersion_table(-k, p), atol=1e-12)
        np.testing.assert_allclose(table, dispersion_table(k, p.mirrored()), atol=1e-12)


def test_dispersion_flags_broken_levels(broken_params):
    assert dispersion(1, 2.2, broken_params).is_real
    assert not dispersion(9, 2.2, broken_params).is_real
    assert dispersion(5, 2.2, broken_params).value == 0


def test_dispersion_accepts_polar_field():
    p = CouplingParams(0.3, 0.4)
    assert dispersion(3, 0.9, p.polar).value == pytest.approx(dispersion(3, 0.9, p).value)


@pytest.mark.parametrize("n, k", [(0, 1.0), (17, 1.0), (1, 0.0), (1, math.pi)])
def test_dispersion_rejects_out_of_range(n, k):
    with pytest.raises(InvalidParameters):
        dispersion(n, k, CouplingParams(0.5, 0.5))


@pytest.mark.parametrize("eta, xi, label", [
    (0.5, 0.0, "II"),
    (0.1, -0.6, "II"),
    (1.5, 0.0, "I"),
    (0.4, 1.4, "I"),
    (-1.5, 0.2, "III"),
    (1.0, 0.0, "boundary"),
    (0.0, 1.5, "boundary"),
])
def test_classify_phase(eta, xi, label):
    assert classify_phase(eta, xi).label == label


def test_classify_phase_distance():
    assert classify_phase(0.5, 0.0).distance == pytest.approx(0.5)
    assert classify_phase(0.2, 1.5).distance == pytest.approx(0.2)
