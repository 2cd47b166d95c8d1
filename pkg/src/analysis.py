# src/analysis.py
"""Auswertung: Exponentialfits von F(β), harmonische Fits über φ, Minimumsuche."""
import logging
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .errors import DegenerateWindow, FlatScan, InsufficientData, InvalidParameters, RankDeficient

logger = logging.getLogger(__name__)

LOG_FLOOR = 1e-300
PLATEAU_TOL = 1e-8
FLAT_TOL = 1e-6
MIN_FIT_POINTS = 3
MIN_SCAN_POINTS = 5


@dataclass(frozen=True)
class FitResult:
    """ln F = Γ·β + ln A über das Fenster window = (β_min, β_max)."""
    gamma: float
    lnA: float
    r_squared: float
    window: tuple
    n_points: int

    @property
    def A(self):
        return math.exp(self.lnA)


@dataclass(frozen=True)
class HarmonicFit:
    a0: float
    a2: float
    a4: float
    relative_residual: float
    order: tuple

    def evaluate(self, phi):
        phi = np.asarray(phi, dtype=float)
        out = self.a0 + self.a2 * np.cos(2.0 * phi)
        if self.a4 is not None:
            out = out + self.a4 * np.cos(4.0 * phi)
        return out


def _largest_finite_run(mask):
    best_start, best_len = 0, 0
    start = None
    for i, ok in enumerate(list(mask) + [False]):
        if ok and start is None:
            start = i
        elif not ok and start is not None:
            if i - start > best_len:
                best_start, best_len = start, i - start
            start = None
    return best_start, best_len


def fit_exponential(betas, F=None, log_F=None, floor=LOG_FLOOR, plateau_tol=PLATEAU_TOL):
    """Kleinste-Quadrate-Gerade durch ln F über β.

    Args:
        betas: Inverse Temperaturen.
        F: Fidelity-Werte; Werte <= floor gelten als nicht auswertbar.
        log_F: Alternativ direkt ln F (bevorzugt, keine Unterlaufgefahr).
        floor (float): Untergrenze für F.
        plateau_tol (float): Führende Punkte mit |ln F| < plateau_tol werden
            verworfen, solange mindestens drei Punkte übrig bleiben.

    Returns:
        FitResult

    Raises:
        InsufficientData: Weniger als drei auswertbare Punkte.
        DegenerateWindow: Kein Punkt oberhalb der Schwelle oder alle β gleich.
    """
    betas = np.asarray(betas, dtype=float)
    if log_F is not None:
        y = np.asarray(log_F, dtype=float)
    elif F is not None:
        values = np.asarray(F, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            y = np.where(values > floor, np.log(np.where(values > floor, values, 1.0)), np.nan)
    else:
        raise InvalidParameters("Entweder F oder log_F muss angegeben werden")
    if y.shape != betas.shape:
        raise InvalidParameters(f"Längen passen nicht zusammen ({betas.size} β, {y.size} Werte)")
    if betas.size < MIN_FIT_POINTS:
        raise InsufficientData(f"Mindestens {MIN_FIT_POINTS} Punkte nötig, erhalten: {betas.size}")

    finite = np.isfinite(y) & np.isfinite(betas)
    if not finite.any():
        raise DegenerateWindow("Kein Wert von F liegt oberhalb der Schwelle")
    start, length = _largest_finite_run(finite)
    if length < MIN_FIT_POINTS:
        raise InsufficientData(f"Größtes zusammenhängendes Fenster hat nur {length} Punkte")
    x = betas[start:start + length]
    y = y[start:start + length]

    plateau = 0
    while plateau < len(y) and abs(y[plateau]) < plateau_tol:
        plateau += 1
    if 0 < plateau and len(y) - plateau >= MIN_FIT_POINTS:
        logger.debug("fit_exponential: %d führende Plateau-Punkte verworfen", plateau)
        x, y = x[plateau:], y[plateau:]

    design = np.column_stack([x, np.ones_like(x)])
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < 2:
        raise DegenerateWindow("Alle β im Fitfenster sind gleich")
    gamma, ln_a = float(coef[0]), float(coef[1])

    ss_res = float(np.sum((y - design @ coef) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 or ss_res == 0.0 else min(max(1.0 - ss_res / ss_tot, 0.0), 1.0)
    return FitResult(gamma=gamma, lnA=ln_a, r_squared=r_squared,
                     window=(float(x[0]), float(x[-1])), n_points=int(len(x)))


def _normalize_order(order):
    if order in (2, "2", (2,)):
        return (2,)
    if order in ((2, 4), [2, 4], {2, 4}, "2,4"):
        return (2, 4)
    raise InvalidParameters(f"Ordnung muss 2 oder (2, 4) sein, erhalten: {order!r}")


def fit_harmonic(phis, values, order=2):
    """Projiziert values(φ) auf {1, cos 2φ} bzw. {1, cos 2φ, cos 4φ}.

    Returns:
        HarmonicFit: Koeffizienten und ‖Residuum‖ / ‖values‖.

    Raises:
        RankDeficient: Zu wenige oder doppelte Winkel.
    """
    order = _normalize_order(order)
    phis = np.asarray(phis, dtype=float)
    y = np.asarray(values, dtype=float)
    if phis.shape != y.shape:
        raise InvalidParameters(f"Längen passen nicht zusammen ({phis.size} Winkel, {y.size} Werte)")
    columns = [np.ones_like(phis)] + [np.cos(m * phis) for m in order]
    if len(np.unique(np.round(phis, 12))) != phis.size:
        raise RankDeficient("Winkel φ sind nicht paarweise verschieden")
    design = np.column_stack(columns)
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < design.shape[1]:
        raise RankDeficient(f"Designmatrix hat Rang {rank} < {design.shape[1]}")

    residual = float(np.linalg.norm(y - design @ coef))
    norm = float(np.linalg.norm(y))
    return HarmonicFit(
        a0=float(coef[0]),
        a2=float(coef[1]),
        a4=float(coef[2]) if len(order) == 2 else None,
        relative_residual=residual / norm if norm > 0.0 else residual,
        order=order,
    )


def fit_temp_scan(table):
    """Exponentialfit je Winkel einer temp-scan-Tabelle (Spalten beta, log_F, optional phi)."""
    if "phi" not in table.columns:
        return {None: fit_exponential(table["beta"].to_numpy(), log_F=table["log_F"].to_numpy())}
    fits = {}
    for phi, group in table.groupby("phi", sort=True):
        group = group.sort_values("beta")
        fits[float(phi)] = fit_exponential(group["beta"].to_numpy(), log_F=group["log_F"].to_numpy())
    return fits


def fit_harmonic_table(fits):
    """Γ(φ) mit Ordnung 2 und ln A(φ) mit Ordnung (2, 4) aus {φ: FitResult}."""
    phis = sorted(phi for phi in fits if phi is not None)
    gamma = fit_harmonic(phis, [fits[phi].gamma for phi in phis], order=2)
    ln_a = fit_harmonic(phis, [fits[phi].lnA for phi in phis], order=(2, 4))
    return gamma, ln_a


def locate_minima(etas, values, flat_tol=FLAT_TOL):
    """Minimum eines η-Scans, verfeinert durch die Parabel durch drei Stützstellen.

    Das Gitter darf ungleichmäßig sein. Liegt das Minimum am Rand, wird die
    Stützstelle selbst zurückgegeben.
    """
    x = np.asarray(etas, dtype=float)
    y = np.asarray(values, dtype=float)
    if x.shape != y.shape:
        raise InvalidParameters(f"Längen passen nicht zusammen ({x.size} η, {y.size} Werte)")
    if x.size < MIN_SCAN_POINTS:
        raise InsufficientData(f"Mindestens {MIN_SCAN_POINTS} Punkte nötig, erhalten: {x.size}")
    if np.any(np.diff(x) <= 0.0):
        raise InvalidParameters("η-Werte müssen streng aufsteigend sein")
    if not np.all(np.isfinite(y)):
        raise InvalidParameters("Scan enthält nicht-endliche Werte")
    if float(y.max() - y.min()) < flat_tol:
        raise FlatScan(f"Kein Einbruch: max − min = {float(y.max() - y.min()):.3g}")

    i = int(np.argmin(y))
    if i == 0 or i == x.size - 1:
        return float(x[i])
    x0, x1, x2 = x[i - 1], x[i], x[i + 1]
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    num = (x1 - x0) ** 2 * (y1 - y2) - (x1 - x2) ** 2 * (y1 - y0)
    den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0)
    if den == 0.0:
        return float(x1)
    vertex = x1 - 0.5 * num / den
    return float(min(max(vertex, x0), x2))


def critical_line(table, beta=None, column="log_F"):
    """η* je ξ-Zeile einer sweep2d-Tabelle; Zeilen ohne Einbruch bekommen NaN."""
    if beta is not None:
        table = table[table["beta"] == beta]
    rows = []
    for xi, group in table.groupby("xi", sort=True):
        group = group.sort_values("eta")
        group = group[np.isfinite(group[column])]
        try:
            eta_star = locate_minima(group["eta"].to_numpy(), group[column].to_numpy())
        except (FlatScan, InsufficientData) as e:
            logger.debug("critical_line: ξ=%.6g ohne Minimum (%s)", xi, e)
            eta_star = math.nan
        expected = math.sqrt(1.0 - xi * xi) if abs(xi) < 1.0 else math.nan
        rows.append({"xi": xi, "eta_star": eta_star, "eta_expected": expected})
    return pd.DataFrame(rows, columns=["xi", "eta_star", "eta_expected"])
