# src/validation.py
"""Prüfsuite für den Befehl validate.

Jede Prüfung liefert ein Residuum, das mit ihrer Toleranz verglichen wird.
Eine Ausnahme innerhalb einer Prüfung gilt als Fehlschlag mit der Meldung
als Detail.
"""
import logging
import math
import time
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import oracle
from .errors import InvalidParameters, SingularDenominator
from .fidelity import ground_overlap, limit_overlap_k0, total_fidelity
from .model import CouplingParams, dispersion_table, momentum_grid
from .sector import (EVEN_MASKS, INVARIANT_BLOCKS, analytic_left_eigenstate, analytic_right_eigenstate,
                     mirror_similarity_residual, sector_eigensystem, sector_matrix)

logger = logging.getLogger(__name__)

PHI0_REFERENCE = 0.0985329
ZERO_T_K = 1e-3


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float
    tolerance: float
    passed: bool
    seconds: float
    detail: str = ""


def spectrum_distance(a, b):
    """Größter Abstand nach optimaler Zuordnung zweier Eigenwert-Multimengen."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.size != b.size:
        return math.inf
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max(initial=0.0))


def _random_points(rng, count):
    for _ in range(count):
        r = rng.uniform(0.0, 1.5)
        phi = rng.uniform(0.0, 2.0 * math.pi)
        k = rng.uniform(0.05, math.pi - 0.05)
        yield k, CouplingParams.from_polar(r, phi)


def _check_dispersion_symmetry(rng):
    pairs = ((1, 0, -1), (3, 2, -1), (9, 8, -1), (11, 10, -1), (12, 8, 1), (13, 8, -1), (14, 10, 1), (15, 10, -1))
    worst = 0.0
    for k, p in _random_points(rng, 200):
        table = dispersion_table(k, p.polar)
        worst = max(worst, float(np.max(np.abs(table - dispersion_table(-k, p.polar)))))
        worst = max(worst, float(np.max(np.abs(table[4:8]))))
        for n, m, sign in pairs:
            worst = max(worst, abs(table[n] - sign * table[m]))
        worst = max(worst, float(np.max(np.abs(table - dispersion_table(k, p.mirrored().polar)))))
    return worst, "200 Zufallspunkte"


def _analytic_systems(rng, count):
    skipped = 0
    for k, p in _random_points(rng, count):
        try:
            yield k, p, sector_eigensystem(k, p, method="analytic")
        except SingularDenominator:
            skipped += 1
    if skipped:
        logger.debug("%d Zufallspunkte mit singulärer geschlossener Form übersprungen", skipped)


def _check_biorthonormality(rng):
    eye = np.eye(16)
    worst = 0.0
    for k, p, system in _analytic_systems(rng, 200):
        worst = max(worst, float(np.max(np.abs(system.left @ system.right - eye))))
        # rohe geschlossene Formen direkt gegen h_k, unabhängig von der Normierung
        h = sector_matrix(k, p.eta, p.xi)
        scale = max(1.0, float(np.max(np.abs(h))))
        for n in range(1, 17):
            lam = system.values[n - 1]
            right = analytic_right_eigenstate(n, k, p)
            left = analytic_left_eigenstate(n, k, p)
            worst = max(worst, float(np.max(np.abs(h @ right - lam * right))) / (scale * np.max(np.abs(right))))
            worst = max(worst, float(np.max(np.abs(left @ h - np.conj(lam) * left))) / (scale * np.max(np.abs(left))))
    return worst, "max |L·R − 1| und Eigengleichungen der geschlossenen Formen"


def _check_completeness(rng):
    eye = np.eye(16)
    worst = 0.0
    for _, _, system in _analytic_systems(rng, 200):
        worst = max(worst, float(np.max(np.abs(system.right @ system.left - eye))))
    return worst, "max |Σ R_n L_n − 1|"


def _check_reconstruction(rng):
    worst = 0.0
    for k, p, system in _analytic_systems(rng, 200):
        h = sector_matrix(k, p.eta, p.xi)
        worst = max(worst, float(np.max(np.abs(system.reconstruct() - h))) / max(1.0, float(np.max(np.abs(h)))))
    return worst, "max |R Λ L − h_k| relativ"


def _check_analytic_vs_numeric(rng):
    worst = 0.0
    for k, p in _random_points(rng, 100):
        h = sector_matrix(k, p.eta, p.xi)
        expected = 2.0 * dispersion_table(k, p.polar)
        worst = max(worst, spectrum_distance(np.linalg.eigvals(h), expected))
        worst = max(worst, spectrum_distance(sector_eigensystem(k, p, method="numeric").values, expected))
    return worst, "numpy.linalg.eigvals und QR-Kern gegen 2ε^n"


def _check_parity_blocks(rng):
    block_of = {mask: b for b, block in enumerate(INVARIANT_BLOCKS) for mask in block}
    worst = 0.0
    for k, p in _random_points(rng, 50):
        h = sector_matrix(k, p.eta, p.xi)
        for i in range(16):
            for j in range(16):
                if block_of[i] != block_of[j] or ((i in EVEN_MASKS) != (j in EVEN_MASKS)):
                    worst = max(worst, abs(h[i, j]))
    return worst, "Elemente außerhalb der invarianten Blöcke"


def _check_k_mirror(rng):
    worst = 0.0
    for k, p in _random_points(rng, 50):
        worst = max(worst, mirror_similarity_residual(k, p))
    return worst, "P h(k) Pᵀ gegen h(−k)"


def _check_jw_equivalence(rng):
    worst = 0.0
    for _ in range(3):
        p = CouplingParams(rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5), N=2)
        spin = np.linalg.eigvals(oracle.spin_hamiltonian_dense(p, 4).matrix)
        union = np.concatenate([oracle.jw_sector_spectrum(p, 4, s) for s in (1, -1)])
        worst = max(worst, spectrum_distance(spin, union))
    return worst, "2N = 4, Spinspektrum gegen Paritätssektoren"


def _check_momentum_sectors(rng):
    p = CouplingParams(rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2), N=4)
    dense = np.linalg.eigvals(oracle.fermion_sector_hamiltonian(p, 8, 1))
    summed = np.linalg.eigvals(oracle.fermion_sum_hamiltonian(p, 4).matrix)
    return spectrum_distance(dense, summed), "2N = 8, H_+ im Ortsraum gegen −J Σ_k h_k"


def _check_kronecker_sum(rng):
    p = CouplingParams(rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2), N=4)
    k1, k2 = momentum_grid(4, 1).paired
    e1 = 2.0 * dispersion_table(k1, p.polar)
    e2 = 2.0 * dispersion_table(k2, p.polar)
    expected = -p.J * (e1[:, None] + e2[None, :]).ravel()
    summed = np.linalg.eigvals(oracle.fermion_sum_hamiltonian(p, 4).matrix)
    return spectrum_distance(summed, expected), "N = 4, 16² Summen"


def _check_factorization(rng):
    worst = 0.0
    for _ in range(5):
        eta, xi = rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2)
        p1 = CouplingParams(eta, xi, N=4)
        p2 = CouplingParams(eta + 0.05, xi + 0.05, N=4)
        for beta in (0.5, 1.0, 2.0, 5.0):
            dense = oracle.fermion_sum_fidelity(p1, p2, beta, N=4)
            worst = max(worst, abs(dense - total_fidelity(p1, p2, beta).F))
    return worst, "5 Punktpaare x β ∈ {0.5, 1, 2, 5}"


def _check_hermitian_limit(rng):
    worst = 0.0
    for eta in np.linspace(0.5, 1.5, 20):
        p1 = CouplingParams(float(eta), 0.0, N=100)
        p2 = CouplingParams(float(eta) + 0.01, 0.0, N=100)
        reference = oracle.hermitian_total_fidelity(p1, p2, 5.0)
        worst = max(worst, abs(total_fidelity(p1, p2, 5.0).F - reference))
    return worst, "20 η-Punkte, β = 5, N = 100"


def _zero_t_samples():
    """20 (r, φ, Δr) Punkte, bei denen k = 10⁻³ den Grenzwert bis 10⁻³ auflöst.

    Alle Winkel liegen in [0, π]. Beidseits des Kreises (r = 1) ist die
    Abweichung linear in k mit Skala 1/Δr; dort werden φ = π/2 (endlicher
    Grenzwert) sowie φ = 0, π mit großem Δr genommen. Die übrigen Paare
    liegen auf einer Seite des Kreises, wo die Abweichung quadratisch in k
    ist.
    """
    samples = [(1.0, math.pi / 2.0, dr) for dr in (0.5, 0.55, 0.6, 0.7, 0.8, 0.9)]
    samples += [(1.0, 0.0, 0.9), (1.0, math.pi, 0.9)]
    samples += [(0.5, phi, 0.1) for phi in (0.0, 0.3, 0.7, 1.2, math.pi / 2.0, 2.8)]
    samples += [(1.8, phi, 0.3) for phi in (0.0, 0.3, 1.0, 2.2, 2.8, math.pi)]
    return samples


def _check_zero_t_limits(rng):
    samples = _zero_t_samples()
    worst = 0.0
    for r, phi, dr in samples:
        worst = max(worst, abs(limit_overlap_k0(r, phi, dr) - ground_overlap(ZERO_T_K, r, phi, dr)))
    phi0 = limit_overlap_k0(1.0, math.pi / 2.0, 0.02)
    tiny = 1e-4
    asymptote = abs(limit_overlap_k0(1.0, math.pi / 2.0, tiny) / math.sqrt(tiny / 2.0) - 1.0)
    # φ₀ auf 10⁻⁶ und die √(Δr/2)-Asymptote auf 5 %, in Einheiten der Toleranz
    worst = max(worst, abs(phi0 - PHI0_REFERENCE) * 1e3, asymptote / 0.05 * 1e-3)
    return worst, (f"{len(samples)} (r, φ, Δr) Punkte bei k = {ZERO_T_K:g}; "
                   f"φ₀-Wert {phi0:.7f}; Asymptote {asymptote:.2%}")


def _check_exactness_floor(rng):
    worst = 0.0
    for _ in range(4):
        p1 = CouplingParams(rng.uniform(-1.4, 1.4), rng.uniform(-1.4, 1.4), N=20)
        p2 = p1.with_field(p1.eta + 0.02, p1.xi - 0.01)
        worst = max(worst, abs(total_fidelity(p1, p1, 2.0).F - 1.0))
        worst = max(worst, abs(total_fidelity(p1, p2, 0.0).F - 1.0))
        worst = max(worst, abs(total_fidelity(p1, p2, 2.0).F - total_fidelity(p2, p1, 2.0).F))
    return worst, "F(p, p) = 1, β = 0, Symmetrie"


CHECKS = (
    ("dispersion_symmetry", _check_dispersion_symmetry, 1e-12),
    ("biorthonormality", _check_biorthonormality, 1e-10),
    ("completeness", _check_completeness, 1e-9),
    ("reconstruction", _check_reconstruction, 1e-9),
    ("analytic_vs_numeric", _check_analytic_vs_numeric, 1e-9),
    ("parity_blocks", _check_parity_blocks, 1e-14),
    ("k_mirror", _check_k_mirror, 1e-12),
    ("jw_equivalence", _check_jw_equivalence, 1e-9),
    ("momentum_sectors", _check_momentum_sectors, 1e-8),
    ("kronecker_sum", _check_kronecker_sum, 1e-8),
    ("factorization", _check_factorization, 1e-8),
    ("hermitian_limit", _check_hermitian_limit, 1e-9),
    ("zero_t_limits", _check_zero_t_limits, 1e-3),
    ("exactness_floor", _check_exactness_floor, 1e-9),
)


def run_checks(tolerance=None, seed=0, names=None):
    """Führt die Prüfungen aus.

    Args:
        tolerance (float): Globale Toleranz statt der Standardwerte je Prüfung.
        seed (int): Startwert der Zufallspunkte.
        names: Optionale Auswahl von Prüfungsnamen.

    Returns:
        list[CheckResult]
    """
    known = [name for name, _, _ in CHECKS]
    unknown = sorted(set(names or ()) - set(known))
    if unknown:
        raise InvalidParameters(f"Unbekannte Prüfung(en): {', '.join(unknown)} (bekannt: {', '.join(known)})")
    results = []
    for name, check, default_tol in CHECKS:
        if names is not None and name not in names:
            continue
        tol = default_tol if tolerance is None else tolerance
        rng = np.random.default_rng(seed)
        start = time.perf_counter()
        try:
            residual, detail = check(rng)
            residual = float(residual)
            passed = bool(residual <= tol)
        except Exception as e:
            logger.debug("Prüfung %s abgebrochen", name, exc_info=True)
            residual, detail, passed = math.inf, f"{type(e).__name__}: {e}", False
        seconds = time.perf_counter() - start
        logger.info("%s: Residuum %.3g (Toleranz %.1g) %s", name, residual, tol, "ok" if passed else "FEHLER")
        results.append(CheckResult(name, residual, tol, passed, seconds, detail))
    return results
