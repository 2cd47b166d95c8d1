# src/fidelity.py
"""Thermische Sektorzustände, Mischzustands-Fidelity und Parameter-Scans.

H = −J Σ_k h_k, die Energien im Sektor k sind also E_n = −2Jε^n und der
Gibbs-Zustand eines Sektors ist ρ_k ∝ Σ_n e^{2βJε^n} |R_n⟩⟨L_n|. Die
Gesamt-Fidelity faktorisiert über die Impulse des Standardgitters und wird
als Σ_k log|F_k| akkumuliert.
"""
import concurrent.futures
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from . import matfun
from .errors import InvalidParameters, PtIsingError, SectorError, SingularDenominator
from .model import IS_REAL_TOL, CouplingParams, dispersion_table, momentum_grid, polar_from_cartesian
from .sector import BLOCK_LEVELS, closed_form_state, sector_eigensystem

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ["eta", "xi", "beta", "F", "log_F", "im_residual", "broken_sectors", "error"]
TEMP_SCAN_COLUMNS = ["phi", "eta", "xi", "beta", "F", "log_F", "im_residual", "broken_sectors", "error"]
GAUGES = ("symmetric", "unit_left")
CRITICAL_TOL = 1e-12
# Blöcke in Niveau-Indizes, in denen L₁·R₂ blockdiagonal ist
LEVEL_BLOCKS = tuple(tuple(n - 1 for n in levels) for levels in BLOCK_LEVELS)


@dataclass(frozen=True, eq=False)
class ThermalSectorState:
    """ρ_k = R · diag(weights) · L; root_weights sind e^{x/2}/√Z zu den Exponenten x."""
    k: float
    params: CouplingParams
    beta: float
    rho: np.ndarray
    log_norm: float
    pt_broken: bool
    right: np.ndarray = None
    left: np.ndarray = None
    weights: np.ndarray = None
    root_weights: np.ndarray = None


@dataclass(frozen=True)
class FidelityPoint:
    """Eine Auswertung (η, ξ, β): F = exp(log_F) ist der Betrag des Produkts."""
    eta: float
    xi: float
    beta: float
    F: float
    log_F: float
    im_residual: float
    broken_sectors: int

    def as_row(self):
        return {
            "eta": self.eta, "xi": self.xi, "beta": self.beta, "F": self.F, "log_F": self.log_F,
            "im_residual": self.im_residual, "broken_sectors": self.broken_sectors, "error": "",
        }


@dataclass(frozen=True)
class Displacement:
    """Verschiebung zwischen den beiden verglichenen Parameterpunkten.

    cartesian: (η, ξ) gegen (η+Δη, ξ+Δξ).
    radial: (r−Δr, φ) gegen (r+Δr, φ) bei festem Winkel.
    """
    mode: str = "cartesian"
    d_eta: float = 0.0
    d_xi: float = 0.0
    dr: float = 0.0

    def __post_init__(self):
        values = (self.d_eta, self.d_xi, self.dr)
        if not all(math.isfinite(v) for v in values):
            raise InvalidParameters(f"Verschiebung muss endlich sein: {values}")
        if self.mode == "cartesian":
            if self.dr != 0.0:
                raise InvalidParameters("Kartesische Verschiebung erlaubt kein dr")
            if self.d_eta == 0.0 and self.d_xi == 0.0:
                raise InvalidParameters("Kartesische Verschiebung braucht Δη oder Δξ ungleich 0")
        elif self.mode == "radial":
            if self.d_eta != 0.0 or self.d_xi != 0.0:
                raise InvalidParameters("Radiale Verschiebung erlaubt kein Δη/Δξ")
            if self.dr <= 0.0:
                raise InvalidParameters(f"dr muss positiv sein, erhalten: {self.dr}")
        else:
            raise InvalidParameters(f"Unbekannter Verschiebungsmodus: {self.mode!r} (cartesian, radial)")

    def pair(self, eta, xi, N=4, J=1.0):
        """Die beiden Parameterpunkte (p1, p2) zum Knoten (η, ξ)."""
        if self.mode == "cartesian":
            return (CouplingParams(eta, xi, N=N, J=J),
                    CouplingParams(eta + self.d_eta, xi + self.d_xi, N=N, J=J))
        polar = polar_from_cartesian(eta, xi)
        if polar.r - self.dr < 0.0:
            raise InvalidParameters(f"r − dr < 0 (r={polar.r:.6g}, dr={self.dr:.6g})")
        return (CouplingParams.from_polar(polar.r - self.dr, polar.phi, N=N, J=J),
                CouplingParams.from_polar(polar.r + self.dr, polar.phi, N=N, J=J))


def _axis(lo, hi, step, name):
    if not (step > 0 and math.isfinite(step)):
        raise InvalidParameters(f"{name}_step muss positiv sein, erhalten: {step}")
    if hi < lo:
        raise InvalidParameters(f"{name}_max < {name}_min ({hi} < {lo})")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return tuple(lo + i * step for i in range(count))


@dataclass(frozen=True)
class SweepConfig:
    eta_min: float
    eta_max: float
    eta_step: float
    xi_min: float
    xi_max: float
    xi_step: float
    betas: tuple
    N: int = 300
    displacement: Displacement = field(default_factory=lambda: Displacement("cartesian", 0.01, 0.01))
    J: float = 1.0
    method: str = "auto"
    output: str = None

    def __post_init__(self):
        _axis(self.eta_min, self.eta_max, self.eta_step, "eta")
        _axis(self.xi_min, self.xi_max, self.xi_step, "xi")
        if self.N % 2 or self.N < 2:
            raise InvalidParameters(f"N muss gerade und >= 2 sein, erhalten: {self.N}")
        if not self.betas:
            raise InvalidParameters("Mindestens ein β wird benötigt")
        for beta in self.betas:
            _check_beta(beta)

    @property
    def etas(self):
        return _axis(self.eta_min, self.eta_max, self.eta_step, "eta")

    @property
    def xis(self):
        return _axis(self.xi_min, self.xi_max, self.xi_step, "xi")


def _check_beta(beta):
    if not (math.isfinite(beta) and beta >= 0.0):
        raise InvalidParameters(f"β muss endlich und >= 0 sein, erhalten: {beta}")


def _is_broken(table, tol=IS_REAL_TOL):
    return bool(np.any(np.abs(table.imag) > tol))


def _thermal_from_system(system, k, p, beta, pt_broken):
    if beta == 0.0:
        rho = np.eye(16, dtype=np.complex128) / 16.0
        return ThermalSectorState(k=k, params=p, beta=0.0, rho=rho, log_norm=0.0, pt_broken=pt_broken)
    exponents = beta * p.J * system.values
    shift = float(np.max(exponents.real))
    raw = np.exp(exponents - shift)
    total = complex(raw.sum())
    weights = raw / total
    # Wurzel über den halben Exponenten, nicht über den Hauptzweig von √w
    root_weights = np.exp(0.5 * (exponents - shift)) / np.sqrt(total)
    rho = (system.right * weights) @ system.left
    return ThermalSectorState(k=k, params=p, beta=beta, rho=rho, log_norm=shift, pt_broken=pt_broken,
                              right=system.right, left=system.left, weights=weights,
                              root_weights=root_weights)


def thermal_sector_state(k, p, beta, method="auto"):
    """Gibbs-Zustand ρ_k = e^{−βH_k} / tr e^{−βH_k} eines Sektors.

    Args:
        k (float): Impuls in (0, π).
        p (CouplingParams): Modellparameter.
        beta (float): Inverse Temperatur (>= 0, in 1/J).
        method (str): Lösungsweg des Sektor-Eigensystems.

    Returns:
        ThermalSectorState: ρ mit Spur 1; log_norm ist der abgezogene Exponent.
    """
    _check_beta(beta)
    system = sector_eigensystem(k, p, method=method)
    return _thermal_from_system(system, k, p, beta, _is_broken(dispersion_table(k, p.polar)))


def sector_fidelity(s1, s2):
    """F_k = tr √(ρ̃^{1/2} ρ ρ̃^{1/2}) über das Spektrum von ρ·ρ̃ (komplex).

    Gerechnet wird in der Eigenbasis: mit G = L·R̃ und G̃ = L̃·R ist
    spec(ρρ̃) = spec(M·M̃) für M = W^{1/2} G W̃^{1/2} und M̃ = W̃^{1/2} G̃ W^{1/2}.
    Das Vorzeichen jeder Wurzel folgt dem Produkt der Gewichtswurzeln
    √w_n·√w̃_n, so dass identische Zustände auch in gebrochenen Sektoren
    F_k = Σ_n w_n = 1 ergeben. Im hermiteschen Fall ist M̃ = M† und F_k die
    Summe der Singulärwerte von M.
    """
    if s1.k != s2.k or s1.beta != s2.beta:
        raise InvalidParameters(f"Sektorzustände passen nicht zusammen (k: {s1.k}/{s2.k}, β: {s1.beta}/{s2.beta})")
    if s1.beta == 0.0:
        return 1.0 + 0.0j
    g = s1.left @ s2.right
    g_tilde = s2.left @ s1.right
    m = s1.root_weights[:, None] * g * s2.root_weights[None, :]
    m_tilde = s2.root_weights[:, None] * g_tilde * s1.root_weights[None, :]
    result = matfun.trace_sqrt_product(m, m_tilde, blocks=LEVEL_BLOCKS,
                                       reference=s1.root_weights * s2.root_weights)
    if result.branch_cut:
        logger.debug("Sektor k=%.6g: Eigenwerte von ρρ̃ am Verzweigungsschnitt", s1.k)
    return result.value


def _fidelity_series(p1, p2, betas, method="auto"):
    """Gesamt-Fidelity für mehrere β mit einmal berechneten Eigensystemen je Sektor."""
    grid = momentum_grid(p1.N, 1).paired
    logs = [[] for _ in betas]
    residual = [0.0 for _ in betas]
    broken = 0

    for k in grid:
        try:
            sys1 = sector_eigensystem(k, p1, method=method)
            sys2 = sys1 if p2 == p1 else sector_eigensystem(k, p2, method=method)
            is_broken = _is_broken(dispersion_table(k, p1.polar)) or _is_broken(dispersion_table(k, p2.polar))
            for i, beta in enumerate(betas):
                if beta == 0.0:
                    logs[i].append(0.0)
                    continue
                f_k = sector_fidelity(_thermal_from_system(sys1, k, p1, beta, is_broken),
                                      _thermal_from_system(sys2, k, p2, beta, is_broken))
                modulus = abs(f_k)
                logs[i].append(math.log(modulus) if modulus > 0.0 else -math.inf)
                if modulus > 0.0:
                    residual[i] = max(residual[i], abs(f_k.imag) / modulus)
        except PtIsingError as e:
            if isinstance(e, SectorError):
                raise
            raise SectorError(k, e) from e
        broken += int(is_broken)

    points = []
    for i, beta in enumerate(betas):
        log_f = math.fsum(logs[i])
        points.append(FidelityPoint(
            eta=p1.eta, xi=p1.xi, beta=beta, F=math.exp(log_f), log_F=log_f,
            im_residual=residual[i], broken_sectors=broken,
        ))
    return points


def total_fidelity(p1, p2, beta, N=None, method="auto"):
    """Mischzustands-Fidelity F(ρ, ρ̃) = Π_k F_k über das σ=+ Gitter.

    Args:
        p1, p2 (CouplingParams): Die beiden Parameterpunkte.
        beta (float): Inverse Temperatur, endlich und >= 0.
        N (int): Anzahl der Impulspaare (Standard: p1.N).

    Returns:
        FidelityPoint

    Raises:
        SectorError: Ein Sektor ist fehlgeschlagen; .k nennt den Impuls.
    """
    N = p1.N if N is None else N
    if p1.N != N or p2.N != N:
        raise InvalidParameters(f"N passt nicht zusammen ({p1.N}, {p2.N}, {N})")
    if p1.J != p2.J:
        raise InvalidParameters(f"J passt nicht zusammen ({p1.J}, {p2.J})")
    _check_beta(beta)
    return _fidelity_series(p1, p2, [beta], method=method)[0]


def _level_one(k, p, method):
    """Rohe Vektoren (R, L) des Niveaus 1; numerisch, wenn die geschlossene Form singulär ist."""
    eps = dispersion_table(k, p.polar)[0]
    if method != "numeric":
        try:
            right = closed_form_state(1, k, p.eta, p.xi, eps)
            left = closed_form_state(1, k, p.eta, -p.xi, eps).conj()
            return right, left
        except SingularDenominator as e:
            if method == "analytic":
                raise
            logger.debug("Niveau 1 bei k=%.6g numerisch (%s)", k, e)
    system = sector_eigensystem(k, p, method="numeric")
    return system.right[:, 0], system.left[0, :]


def _overlap(left_plus, right_plus, left_minus, right_minus, gauge):
    if gauge not in GAUGES:
        raise InvalidParameters(f"Unbekannte Eichung: {gauge!r} ({', '.join(GAUGES)})")
    numerator = abs(np.dot(left_plus, right_minus))
    g_minus = abs(np.dot(left_minus, right_minus))
    if gauge == "symmetric":
        g_plus = abs(np.dot(left_plus, right_plus))
        return float(numerator / math.sqrt(g_plus * g_minus))
    return float(numerator / (np.linalg.norm(left_plus) * math.sqrt(g_minus)))


def _check_radii(r, dr):
    if not (math.isfinite(r) and math.isfinite(dr)) or dr < 0.0:
        raise InvalidParameters(f"Ungültige Radien (r={r}, dr={dr})")
    if r - dr < 0.0:
        raise InvalidParameters(f"r − dr < 0 (r={r}, dr={dr})")


def ground_overlap(k, r, phi, dr, gauge="unit_left", method="auto"):
    """Überlapp O_k = |⟨1(r+Δr, φ)|_k |1(r−Δr, φ)⟩_k| der Grundzustände eines Sektors.

    Args:
        k (float): Impuls in (0, π).
        r, phi (float): Mittelpunkt in Polarkoordinaten.
        dr (float): Radiale Halbverschiebung.
        gauge (str): "symmetric" teilt die Normierung g = L·R gleichmäßig auf
            beide Vektoren auf; "unit_left" normiert den linken Kovektor auf 1.

    Returns:
        float: O_k >= 0.
    """
    _check_radii(r, dr)
    if not (0.0 < k < math.pi):
        raise InvalidParameters(f"k muss in (0, π) liegen, erhalten: {k}")
    if gauge not in GAUGES:
        raise InvalidParameters(f"Unbekannte Eichung: {gauge!r} ({', '.join(GAUGES)})")
    if dr == 0.0:
        return 1.0
    p_minus = CouplingParams.from_polar(r - dr, phi)
    p_plus = CouplingParams.from_polar(r + dr, phi)
    right_minus, left_minus = _level_one(k, p_minus, method)
    right_plus, left_plus = _level_one(k, p_plus, method)
    return _overlap(left_plus, right_plus, left_minus, right_minus, gauge)


# Reihenfolge der k → 0 Grenzvektoren: |0⟩, α_k†α_{−k}†, β_k†β_{−k}†, vier Fermionen,
# α_k†β_{−k}†, β_k†α_{−k}†
def _limit_state(r, phi):
    eta = r * math.cos(phi)
    xi = r * math.sin(phi)
    if r < 1.0:
        gamma = complex(math.sqrt(max(1.0 - (r * math.sin(phi)) ** 2, 0.0)), r * math.sin(phi))
        return np.array([0.0, gamma.conjugate(), gamma, 0.0, 1.0, 1.0], dtype=np.complex128)
    if abs(eta) > CRITICAL_TOL:
        if eta > 0.0:
            return np.array([1.0, 0, 0, 0, 0, 0], dtype=np.complex128)
        return np.array([0, 0, 0, 1.0, 0, 0], dtype=np.complex128)
    s = math.sqrt(r * r - 1.0) / r
    return np.array([-1j * s, -1j / xi, 1j / xi, 1j * s, 1.0, 1.0], dtype=np.complex128)


def limit_overlap_k0(r, phi, dr, gauge="unit_left"):
    """Geschlossener k → 0 Grenzwert des Grundzustandsüberlapps.

    Innerhalb des Einheitskreises ist der Grenzzustand der γ-Zustand mit
    γ = √(1 − r²sin²φ) + i r sinφ, außerhalb das Vakuum (η > 0) bzw. der
    Vier-Fermionen-Zustand (η < 0), auf dem Strahl η = 0 eine Mischung aus
    beiden. Der linke Zustand ist der konjugierte Grenzzustand bei −φ.
    """
    _check_radii(r, dr)
    if dr == 0.0:
        return 1.0
    r_minus, r_plus = r - dr, r + dr
    for radius in (r_minus, r_plus):
        if abs(radius - 1.0) < CRITICAL_TOL:
            raise InvalidParameters(f"Radius {radius:.12g} liegt auf dem kritischen Kreis")
    right_minus = _limit_state(r_minus, phi)
    left_minus = _limit_state(r_minus, -phi).conj()
    right_plus = _limit_state(r_plus, phi)
    left_plus = _limit_state(r_plus, -phi).conj()
    return _overlap(left_plus, right_plus, left_minus, right_minus, gauge)


def zero_T_fidelity(p, dr, N=None, gauge="unit_left"):
    """F_∞ = Π_k O_k über das σ=+ Gitter, radial um p verschoben."""
    N = p.N if N is None else N
    if dr == 0.0:
        return 1.0
    polar = p.polar
    _check_radii(polar.r, dr)
    logs = []
    for k in momentum_grid(N, 1).paired:
        try:
            overlap = ground_overlap(k, polar.r, polar.phi, dr, gauge=gauge)
        except PtIsingError as e:
            raise SectorError(k, e) from e
        logs.append(math.log(overlap) if overlap > 0.0 else -math.inf)
    return math.exp(math.fsum(logs))


def _error_rows(eta, xi, betas, message, extra=None):
    rows = []
    for beta in betas:
        row = {"eta": eta, "xi": xi, "beta": beta, "F": math.nan, "log_F": math.nan,
               "im_residual": math.nan, "broken_sectors": -1, "error": message}
        if extra:
            row.update(extra)
        rows.append(row)
    return rows


def _evaluate_node(task):
    """Ein Gitterknoten mit allen β; Fehler landen in der Spalte error."""
    eta, xi, betas, N, J, displacement, method = task
    try:
        p1, p2 = displacement.pair(eta, xi, N=N, J=J)
        return [point.as_row() for point in _fidelity_series(p1, p2, list(betas), method=method)]
    except PtIsingError as e:
        logger.warning("Punkt (eta=%.6g, xi=%.6g) fehlgeschlagen: %s", eta, xi, e)
        return _error_rows(eta, xi, betas, f"{type(e).__name__}: {e}")


def _run_tasks(function, tasks, workers):
    if workers <= 1 or len(tasks) <= 1:
        return [function(task) for task in tasks]
    results = [None] * len(tasks)
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as ex:
        futures = {ex.submit(function, task): i for i, task in enumerate(tasks)}
        for future in concurrent.futures.as_completed(futures):
            results[futures[future]] = future.result()
    return results


def sweep2d(cfg, workers=1):
    """Fidelity auf dem (η, ξ)-Gitter für alle β der Konfiguration.

    Zeilen in Zeilen-Hauptordnung: ξ außen, η innen, β innerhalb des Knotens.
    """
    tasks = [(eta, xi, tuple(cfg.betas), cfg.N, cfg.J, cfg.displacement, cfg.method)
             for xi in cfg.xis for eta in cfg.etas]
    logger.info("sweep2d: %d Knoten x %d β, N=%d, %d Prozesse", len(tasks), len(cfg.betas), cfg.N, workers)
    rows = [row for node in _run_tasks(_evaluate_node, tasks, workers) for row in node]
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


def _evaluate_angle(task):
    phi, dr, betas, N, J, method = task
    eta, xi = math.cos(phi), math.sin(phi)
    displacement = Displacement("radial", dr=dr)
    rows = _evaluate_node((eta, xi, betas, N, J, displacement, method))
    for row in rows:
        row["phi"] = phi
    return rows


def temp_scan(phi, dr, betas, N, J=1.0, method="auto", workers=1):
    """F(β) am kritischen Punkt r = 1 unter dem Winkel φ bei radialer Verschiebung ±dr.

    phi darf eine Zahl oder eine Folge von Winkeln sein; jede Zeile trägt ihr φ.
    """
    phis = [phi] if np.isscalar(phi) else list(phi)
    betas = [float(b) for b in betas]
    if not betas:
        raise InvalidParameters("Mindestens ein β wird benötigt")
    for beta in betas:
        _check_beta(beta)
    if any(b2 < b1 for b1, b2 in zip(betas, betas[1:])):
        raise InvalidParameters("β-Liste muss aufsteigend sein")
    if not dr > 0.0:
        raise InvalidParameters(f"dr muss positiv sein, erhalten: {dr}")

    tasks = [(float(angle), dr, tuple(betas), N, J, method) for angle in phis]
    rows = [row for node in _run_tasks(_evaluate_angle, tasks, workers) for row in node]
    return pd.DataFrame(rows, columns=TEMP_SCAN_COLUMNS)
