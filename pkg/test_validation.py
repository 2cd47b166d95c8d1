"""Tests der Prüfsuite selbst."""
import math

import pytest

from src import validation
from src.errors import InvalidParameters


def test_spectrum_distance_ignores_order():
    assert validation.spectrum_distance([1.0, 2j, -3.0], [-3.0, 1.0, 2j]) == 0.0
    assert validation.spectrum_distance([1.0], [1.0, 2.0]) == math.inf


@pytest.mark.parametrize("name", ["dispersion_symmetry", "parity_blocks", "k_mirror", "jw_equivalence",
                                  "kronecker_sum", "momentum_sectors"])
def test_structural_checks_pass(name):
    (result,) = validation.run_checks(names=[name])
    assert result.passed, result.detail
    assert result.residual <= result.tolerance


@pytest.mark.parametrize("name", ["biorthonormality", "completeness", "reconstruction", "analytic_vs_numeric"])
def test_eigensystem_checks_pass(name):
    (result,) = validation.run_checks(names=[name], seed=7)
    assert result.passed, result.detail


def test_global_tolerance_overrides_defaults():
    results = validation.run_checks(tolerance=1e-15, names=["k_mirror", "parity_blocks"])
    assert [r.tolerance for r in results] == [1e-15, 1e-15]


def test_failing_check_is_reported_not_raised(monkeypatch):
    def broken(rng):
        raise RuntimeError("kaputt")

    monkeypatch.setattr(validation, "CHECKS", (("broken", broken, 1.0),))
    (result,) = validation.run_checks()
    assert not result.passed
    assert result.residual == math.inf
    assert "kaputt" in result.detail


def test_unknown_check_name():
    with pytest.raises(InvalidParameters):
        validation.run_checks(names=["nope"])


def test_zero_temperature_samples():
    samples = validation._zero_t_samples()
    assert len(samples) == 20
    assert all(r - dr >= 0.0 for r, _, dr in samples)
    assert all(0.0 <= phi <= math.pi for _, phi, _ in samples)


def test_zero_temperature_check_passes():
    (result,) = validation.run_checks(names=["zero_t_limits"])
    assert result.passed, result.detail
    assert "0.098533" in result.detail


@pytest.mark.slow
@pytest.mark.parametrize("name", ["factorization", "hermitian_limit", "exactness_floor"])
def test_fidelity_checks_pass(name):
    (result,) = validation.run_checks(names=[name])
    assert result.passed, result.detail
