"""Tests für thermische Zustände, Fidelity, Grundzustandsüberlapp und Scans."""
import math

import numpy as np
import pytest
import scipy.linalg

from src import fidelity, oracle
from src.errors import InvalidParameters
from src.fidelity import Displacement, SweepConfig
from src.model import CouplingParams
from src.sector import build_sector_hamiltonian, sector_eigensystem


def _phi0_overlap(dr):
    return dr / ((1.0 + dr) * math.sqrt(2.0 * dr - dr * dr))


# Verschiebungen und Gitter

def test_displacement_validation():
    with pytest.raises(InvalidParameters):
        Displacement("cartesian")
    with pytest.raises(InvalidParameters):
        Displacement("radial", dr=0.0)
    with pytest.raises(InvalidParameters):
        Displacement("radial", d_eta=0.1, dr=0.1)
    with pytest.raises(InvalidParameters):
        Displacement("diagonal", d_eta=0.1)


def test_displacement_pairs():
    p1, p2 = Displacement("cartesian", d_eta=0.1, d_xi=-0.05).pair(0.5, 0.2, N=6)
    assert (p1.eta, p1.xi, p1.N) == (0.5, 0.2, 6)
    assert (p2.eta, p2.xi) == pytest.approx((0.6, 0.15))

    p1, p2 = Displacement("radial", dr=0.1).pair(0.0, 1.0)
    assert p1.polar.r == pytest.approx(0.9)
    assert p2.polar.r == pytest.approx(1.1)
    assert p1.polar.phi == pytest.approx(math.pi / 2)

    with pytest.raises(InvalidParameters):
        Displacement("radial", dr=0.1).pair(0.05, 0.0)


def test_sweep_config_axes():
    cfg = SweepConfig(0.0, 1.0, 0.25, -0.1, 0.1, 0.1, betas=(1.0,), N=4)
    assert cfg.etas == pytest.approx((0.0, 0.25, 0.5, 0.75, 1.0))
    assert cfg.xis == pytest.approx((-0.1, 0.0, 0.1))
    with pytest.raises(InvalidParameters):
        SweepConfig(1.0, 0.0, 0.1, 0.0, 0.0, 1.0, betas=(1.0,))
    with pytest.raises(InvalidParameters):
        SweepConfig(0.0, 1.0, 0.1, 0.0, 0.0, 1.0, betas=(-1.0,))
    with pytest.raises(InvalidParameters):
        SweepConfig(0.0, 1.0, 0.1, 0.0, 0.0, 1.0, betas=(1.0,), N=5)


# Thermische Zustände

@pytest.mark.parametrize("beta", [0.0, 0.5, 3.0, 40.0])
def test_thermal_state_has_unit_trace(beta, unbroken_params, broken_params):
    for p in (unbroken_params, broken_params):
        state = fidelity.thermal_sector_state(1.1, p, beta)
        assert np.trace(state.rho) == pytest.approx(1.0, abs=1e-10)


def test_thermal_state_at_infinite_temperature(unbroken_params):
    state = fidelity.thermal_sector_state(1.1, unbroken_params, 0.0)
    np.testing.assert_array_equal(state.rho, np.eye(16) / 16.0)


def test_thermal_state_flags_broken_sector(unbroken_params, broken_params):
    assert not fidelity.thermal_sector_state(1.1, unbroken_params, 1.0).pt_broken
    assert fidelity.thermal_sector_state(1.1, broken_params, 1.0).pt_broken


def test_thermal_state_is_hermitian_without_xi():
    state = fidelity.thermal_sector_state(0.7, CouplingParams(0.8, 0.0), 2.0)
    np.testing.assert_allclose(state.rho, state.rho.conj().T, atol=1e-12)
    assert np.all(np.linalg.eigvalsh(state.rho) > -1e-12)


def test_thermal_state_matches_matrix_exponential_without_xi():
    p = CouplingParams(0.8, 0.0, J=1.3)
    state = fidelity.thermal_sector_state(0.7, p, 1.0)
    h = build_sector_hamiltonian(0.7, p).matrix
    reference = scipy.linalg.expm(1.0 * p.J * h)
    np.testing.assert_allclose(state.rho, reference / np.trace(reference), atol=1e-10)


def test_thermal_state_is_ground_state_dominated_at_low_temperature(unbroken_params):
    state = fidelity.thermal_sector_state(0.9, unbroken_params, 200.0)
    ground = sector_eigensystem(0.9, unbroken_params).projector(1)
    np.testing.assert_allclose(state.rho, ground, atol=1e-8)


@pytest.mark.parametrize("beta", [-1.0, math.inf, math.nan])
def test_thermal_state_rejects_bad_beta(beta, unbroken_params):
    with pytest.raises(InvalidParameters):
        fidelity.thermal_sector_state(1.0, unbroken_params, beta)


@pytest.mark.parametrize("beta", [0.5, 2.0, 40.0])
@pytest.mark.parametrize("k", [0.4, 1.3, 2.9])
def test_sector_fidelity_of_identical_states(k, beta, unbroken_params, broken_params):
    state = fidelity.thermal_sector_state(k, unbroken_params, beta)
    assert abs(fidelity.sector_fidelity(state, state) - 1.0) < 1e-12
    # gebrochene Sektoren haben komplexe Gewichte, auch dort ohne Sonderfall
    state = fidelity.thermal_sector_state(k, broken_params, beta)
    assert abs(fidelity.sector_fidelity(state, state) - 1.0) < 1e-10


def test_sector_fidelity_hermitian_equals_uhlmann():
    s1 = fidelity.thermal_sector_state(0.7, CouplingParams(0.9, 0.0), 5.0)
    s2 = fidelity.thermal_sector_state(0.7, CouplingParams(0.93, 0.0), 5.0)
    value = fidelity.sector_fidelity(s1, s2)
    assert value.real == pytest.approx(oracle.uhlmann_fidelity(s1.rho, s2.rho), abs=1e-9)
    assert abs(value.imag) < 1e-12


def test_sector_fidelity_requires_matching_states(unbroken_params):
    s1 = fidelity.thermal_sector_state(1.0, unbroken_params, 2.0)
    s2 = fidelity.thermal_sector_state(1.2, unbroken_params, 2.0)
    with pytest.raises(InvalidParameters):
        fidelity.sector_fidelity(s1, s2)


# Gesamt-Fidelity

def test_total_fidelity_identity_and_infinite_temperature(unbroken_params, broken_params):
    for p in (unbroken_params, broken_params):
        assert fidelity.total_fidelity(p, p, 3.0).F == pytest.approx(1.0, abs=1e-9)
        point = fidelity.total_fidelity(p, p.with_field(p.eta + 0.1, p.xi - 0.2), 0.0)
        assert point.F == 1.0
        assert point.log_F == 0.0


def test_total_fidelity_is_symmetric(broken_params):
    p2 = broken_params.with_field(0.35, 1.25)
    forward = fidelity.total_fidelity(broken_params, p2, 2.0)
    backward = fidelity.total_fidelity(p2, broken_params, 2.0)
    assert forward.F == pytest.approx(backward.F, rel=1e-9)


@pytest.mark.parametrize("eta, xi", [(0.3, 0.2), (-0.6, 0.5), (0.2, -0.9), (1.4, -0.3)])
def test_total_fidelity_matches_dense_kronecker_sum(eta, xi):
    p1 = CouplingParams(eta, xi, N=4)
    p2 = CouplingParams(eta + 0.05, xi + 0.05, N=4)
    for beta in (0.5, 2.0):
        dense = oracle.fermion_sum_fidelity(p1, p2, beta, N=4)
        assert fidelity.total_fidelity(p1, p2, beta).F == pytest.approx(dense, abs=1e-8)


def test_total_fidelity_hermitian_limit():
    p1 = CouplingParams(0.9, 0.0, N=20)
    p2 = CouplingParams(0.91, 0.0, N=20)
    point = fidelity.total_fidelity(p1, p2, 5.0)
    assert point.F == pytest.approx(oracle.hermitian_total_fidelity(p1, p2, 5.0), abs=1e-9)
    assert 0.0 < point.F <= 1.0
    assert point.broken_sectors == 0
    assert point.im_residual < 1e-9


def test_total_fidelity_low_temperature_tiny_sector_blocks():
    # Gewichte bis ~1e-148 in einzelnen Blöcken
    p1 = CouplingParams(1.4, 0.0, N=40)
    p2 = CouplingParams(1.41, 0.0, N=40)
    point = fidelity.total_fidelity(p1, p2, 50.0)
    assert math.isfinite(point.log_F)
    assert point.F == pytest.approx(oracle.hermitian_total_fidelity(p1, p2, 50.0), abs=1e-9)


@pytest.mark.parametrize("eta, xi, d_eta, d_xi",
                         [(0.3, 0.2, 0.01, 0.02), (0.3, 1.3, 0.02, -0.01), (1.2, 0.5, 0.01, 0.01)])
def test_total_fidelity_is_invariant_under_xi_mirror(eta, xi, d_eta, d_xi):
    p1 = CouplingParams(eta, xi, N=20)
    p2 = CouplingParams(eta + d_eta, xi + d_xi, N=20)
    forward = fidelity.total_fidelity(p1, p2, 2.0)
    mirrored = fidelity.total_fidelity(p1.mirrored(), p2.mirrored(), 2.0)
    assert mirrored.F == pytest.approx(forward.F, abs=1e-9)
    assert mirrored.broken_sectors == forward.broken_sectors


@pytest.mark.slow
def test_total_fidelity_deep_inside_phase_is_close_to_one():
    p1 = CouplingParams.from_polar(0.3, 0.0, N=300)
    p2 = p1.with_field(p1.eta + 0.01, p1.xi + 0.01)
    assert fidelity.total_fidelity(p1, p2, 1.0).F > 0.99


def test_total_fidelity_counts_broken_sectors(broken_params):
    p2 = broken_params.with_field(0.3, 1.31)
    assert fidelity.total_fidelity(broken_params, p2, 1.0).broken_sectors == 2


def test_total_fidelity_parameter_checks():
    with pytest.raises(InvalidParameters):
        fidelity.total_fidelity(CouplingParams(0.5, 0.1, N=4), CouplingParams(0.5, 0.1, N=6), 1.0)
    with pytest.raises(InvalidParameters):
        fidelity.total_fidelity(CouplingParams(0.5, 0.1, J=1.0), CouplingParams(0.5, 0.1, J=2.0), 1.0)
    with pytest.raises(InvalidParameters):
        fidelity.total_fidelity(CouplingParams(0.5, 0.1), CouplingParams(0.5, 0.1), -0.1)


def test_fidelity_dips_near_critical_point():
    def f(eta):
        return fidelity.total_fidelity(CouplingParams(eta, 0.0, N=40), CouplingParams(eta + 0.01, 0.0, N=40), 50.0).F
    assert f(0.995) < f(0.6)
    assert f(0.995) < f(1.4)


# Grundzustandsüberlapp und Nulltemperatur

def test_limit_overlap_phi0_closed_form():
    assert fidelity.limit_overlap_k0(1.0, math.pi / 2, 0.02) == pytest.approx(0.0985329, abs=1e-6)
    assert fidelity.limit_overlap_k0(1.0, 3 * math.pi / 2, 0.02) == pytest.approx(0.0985329, abs=1e-6)
    for dr in (0.01, 0.05, 0.2):
        assert fidelity.limit_overlap_k0(1.0, math.pi / 2, dr) == pytest.approx(_phi0_overlap(dr), rel=1e-9)


def test_limit_overlap_phi0_small_displacement_asymptote():
    dr = 1e-4
    value = fidelity.limit_overlap_k0(1.0, math.pi / 2, dr)
    assert value == pytest.approx(math.sqrt(dr / 2.0), rel=0.05)


def test_ground_overlap_vanishes_off_phi0():
    assert fidelity.ground_overlap(1e-3, 1.0, 0.0, 0.05) < 0.05
    assert fidelity.limit_overlap_k0(1.0, 0.0, 0.05) == pytest.approx(0.0, abs=1e-12)
    assert fidelity.limit_overlap_k0(1.0, 0.3, 0.05) == pytest.approx(0.0, abs=1e-12)


def test_limit_overlap_phi0_symmetric_gauge():
    dr = 0.02
    value = fidelity.limit_overlap_k0(1.0, math.pi / 2, dr, gauge="symmetric")
    assert value == pytest.approx(1.0 / math.sqrt(4.0 - dr * dr), rel=1e-9)


def test_limit_overlap_trivial_cases():
    assert fidelity.limit_overlap_k0(0.4, 1.0, 0.0) == 1.0
    assert fidelity.limit_overlap_k0(1.8, 0.2, 0.3) == pytest.approx(1.0)
    with pytest.raises(InvalidParameters):
        fidelity.limit_overlap_k0(1.5, 0.2, 0.5)
    with pytest.raises(InvalidParameters):
        fidelity.limit_overlap_k0(0.1, 0.2, 0.3)


@pytest.mark.parametrize("gauge", fidelity.GAUGES)
@pytest.mark.parametrize("r, phi, dr", [(0.4, 0.3, 0.2), (1.0, 1.0, 0.3), (1.8, 2.8, 0.3)])
def test_ground_overlap_approaches_limit(gauge, r, phi, dr):
    limit = fidelity.limit_overlap_k0(r, phi, dr, gauge=gauge)
    assert fidelity.ground_overlap(1e-5, r, phi, dr, gauge=gauge) == pytest.approx(limit, abs=1e-3)


@pytest.mark.parametrize("r, phi, dr", [(1.0, math.pi / 2, 0.5), (1.0, 3 * math.pi / 2, 0.9), (0.5, 1.2, 0.1),
                                        (0.5, 4.0, 0.1), (1.8, 0.3, 0.3), (1.8, 3.5, 0.3)])
def test_ground_overlap_at_small_momentum_matches_limit(r, phi, dr):
    limit = fidelity.limit_overlap_k0(r, phi, dr)
    assert fidelity.ground_overlap(1e-3, r, phi, dr) == pytest.approx(limit, abs=1e-3)


def test_ground_overlap_phi0_small_momentum():
    # relative Abweichung vom Grenzwert etwa k/(2Δr)
    assert fidelity.ground_overlap(1e-5, 1.0, math.pi / 2, 0.02) == pytest.approx(0.0985329, abs=1e-4)
    coarse = fidelity.ground_overlap(1e-3, 1.0, math.pi / 2, 0.02)
    assert coarse == pytest.approx(0.0985329, rel=0.05)


def test_ground_overlap_checks():
    assert fidelity.ground_overlap(0.5, 0.8, 0.3, 0.0) == 1.0
    with pytest.raises(InvalidParameters):
        fidelity.ground_overlap(0.5, 0.8, 0.3, 0.1, gauge="left")
    with pytest.raises(InvalidParameters):
        fidelity.ground_overlap(0.5, 0.05, 0.3, 0.1)
    with pytest.raises(InvalidParameters):
        fidelity.ground_overlap(0.0, 0.8, 0.3, 0.1)


def test_ground_overlap_numeric_path_is_finite():
    overlap = fidelity.ground_overlap(0.5, 0.8, 0.3, 0.05, method="numeric")
    assert 0.0 < overlap < 10.0


def test_zero_temperature_fidelity():
    assert fidelity.zero_T_fidelity(CouplingParams(0.3, 0.2, N=20), 0.0) == 1.0
    inside = fidelity.zero_T_fidelity(CouplingParams(0.5, 0.0, N=100), 0.01)
    assert 0.9 < inside <= 1.0 + 1e-12
    outside = fidelity.zero_T_fidelity(CouplingParams(1.6, 0.0, N=20), 0.01)
    assert 0.9 < outside <= 1.0 + 1e-12
    symmetric = fidelity.zero_T_fidelity(CouplingParams(0.3, 0.2, N=20), 0.01, gauge="symmetric")
    assert 0.9 < symmetric < 1.01


def test_zero_temperature_fidelity_vanishes_across_the_circle():
    values = [fidelity.zero_T_fidelity(CouplingParams.from_polar(1.0, 0.3, N=N), 0.05) for N in (20, 100, 500)]
    assert values[0] > values[1] > values[2]
    assert values[2] < 0.1


# Scans

def test_sweep2d_layout():
    cfg = SweepConfig(-0.2, 0.2, 0.2, 0.0, 0.1, 0.1, betas=(1.0, 5.0), N=4)
    table = fidelity.sweep2d(cfg)
    assert list(table.columns) == fidelity.SWEEP_COLUMNS
    assert len(table) == 3 * 2 * 2
    assert list(table["xi"][:6]) == pytest.approx([0.0] * 6)
    assert list(table["eta"][:6]) == pytest.approx([-0.2, -0.2, 0.0, 0.0, 0.2, 0.2])
    assert list(table["beta"][:2]) == [1.0, 5.0]
    assert (table["error"] == "").all()
    assert ((table["F"] > 0.5) & (table["F"] < 1.01)).all()


def test_sweep2d_reports_failed_nodes():
    cfg = SweepConfig(0.0, 0.2, 0.1, 0.0, 0.0, 1.0, betas=(1.0,), N=4, displacement=Displacement("radial", dr=0.05))
    table = fidelity.sweep2d(cfg)
    assert len(table) == 3
    assert "InvalidParameters" in table["error"][0]
    assert math.isnan(table["F"][0])
    assert table["error"][1] == "" and table["error"][2] == ""


def test_sweep2d_process_pool_matches_serial():
    cfg = SweepConfig(0.2, 0.6, 0.2, 0.1, 0.2, 0.1, betas=(2.0,), N=4)
    serial = fidelity.sweep2d(cfg, workers=1)
    parallel = fidelity.sweep2d(cfg, workers=2)
    np.testing.assert_allclose(parallel["F"].to_numpy(), serial["F"].to_numpy(), rtol=1e-12)


def test_temp_scan_layout():
    table = fidelity.temp_scan([0.0, math.pi / 3], 0.01, [1.0, 2.0, 4.0], N=8)
    assert list(table.columns) == fidelity.TEMP_SCAN_COLUMNS
    assert list(table["phi"]) == pytest.approx([0.0] * 3 + [math.pi / 3] * 3)
    assert (table["error"] == "").all()
    assert (np.diff(table["log_F"][:3]) < 0.0).all()


def test_temp_scan_validation():
    with pytest.raises(InvalidParameters):
        fidelity.temp_scan(0.0, 0.01, [2.0, 1.0], N=8)
    with pytest.raises(InvalidParameters):
        fidelity.temp_scan(0.0, 0.0, [1.0], N=8)
    with pytest.raises(InvalidParameters):
        fidelity.temp_scan(0.0, 0.01, [], N=8)


@pytest.mark.slow
def test_scan_minimum_follows_critical_line():
    from src.analysis import locate_minima

    cfg = SweepConfig(0.5, 1.1, 0.01, 0.4, 0.4, 1.0, betas=(100.0,), N=300,
                      displacement=Displacement("cartesian", d_eta=0.01, d_xi=0.0))
    table = fidelity.sweep2d(cfg, workers=2)
    eta_star = locate_minima(table["eta"].to_numpy(), table["log_F"].to_numpy())
    assert eta_star == pytest.approx(math.sqrt(1.0 - 0.4 ** 2), abs=0.02)


@pytest.mark.slow
def test_sweep2d_surface_is_flat_at_high_temperature_and_dips_on_the_circle():
    from src.analysis import critical_line

    cfg = SweepConfig(0.0, 1.4, 0.05, 0.0, 0.8, 0.4, betas=(0.1, 50.0), N=100)
    table = fidelity.sweep2d(cfg, workers=2)
    assert (table["error"] == "").all()
    assert table[table["beta"] == 0.1]["F"].min() > 0.9
    line = critical_line(table, beta=50.0)
    for _, row in line.iterrows():
        assert row["eta_star"] == pytest.approx(math.sqrt(1.0 - row["xi"] ** 2), abs=0.06)


@pytest.mark.slow
def test_temp_scan_log_fidelity_is_linear_in_a_mid_temperature_window():
    from src.analysis import fit_temp_scan

    table = fidelity.temp_scan(0.3, 0.01, [6.0, 6.25, 6.5, 6.75, 7.0], N=200)
    fit = fit_temp_scan(table)[0.3]
    assert fit.gamma < 0.0
    assert fit.r_squared > 0.99
