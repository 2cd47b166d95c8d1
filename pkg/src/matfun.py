# src/matfun.py
"""Kleine dichte komplexe lineare Algebra.

Eigenzerlegung allgemeiner (nicht normaler) Matrizen über Householder-
Hessenberg-Reduktion und Wilkinson-verschobene QR-Iteration mit Deflation,
spektrale Matrixfunktionen sowie die Spur der Wurzel eines Matrixprodukts,
aus der die Fidelity berechnet wird. Die Kernroutinen sind mit numba
kompiliert; die Matrizen sind klein (d ≤ 256).
"""
import cmath
import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.optimize import linear_sum_assignment

from .errors import (BranchCutWarning, DefectiveMatrix, InvalidParameters,
                     NoConvergence)

logger = logging.getLogger(__name__)

MAX_DIM = 256
MAX_QR_SWEEPS = 40
DEFECTIVE_COND = 1e12
BRANCH_CUT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigenwerte mit rechten (Spalten) und linken (Zeilen) Eigenvektoren, left·right = 1."""
    values: np.ndarray
    right: np.ndarray
    left: np.ndarray
    cond: float


@dataclass(frozen=True, eq=False)
class ShiftedExp:
    matrix: np.ndarray
    shift: complex


@dataclass(frozen=True)
class TraceSqrtResult:
    value: complex
    branch_cut: bool


def as_complex_matrix(M):
    """Prüft und konvertiert die Eingabe in eine quadratische complex128-Matrix."""
    a = np.array(M, dtype=np.complex128, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise InvalidParameters(f"Quadratische Matrix erwartet, erhalten: Form {a.shape}")
    if a.shape[0] > MAX_DIM:
        raise InvalidParameters(f"Dimension {a.shape[0]} überschreitet die Grenze {MAX_DIM}")
    if not np.all(np.isfinite(a)):
        raise InvalidParameters("Matrix enthält NaN oder Inf")
    return np.ascontiguousarray(a)


@njit(cache=True, nogil=True)
def _hessenberg_kernel(h, q):
    """Reduziert h in-place auf obere Hessenberg-Form, q sammelt die Reflektoren (A = Q H Q*)."""
    n = h.shape[0]
    for k in range(n - 2):
        m = n - k - 1
        v = np.empty(m, dtype=np.complex128)
        big = 0.0
        for i in range(m):
            v[i] = h[k + 1 + i, k]
            big = max(big, abs(v[i]))
        if big == 0.0:
            continue
        norm_x = 0.0
        for i in range(m):
            v[i] = v[i] / big
            norm_x += v[i].real * v[i].real + v[i].imag * v[i].imag
        norm_x = np.sqrt(norm_x)
        x0 = v[0]
        if abs(x0) > 0.0:
            phase = x0 / abs(x0)
        else:
            phase = 1.0 + 0.0j
        v[0] = x0 + phase * norm_x
        norm_v = 0.0
        for i in range(m):
            norm_v += v[i].real * v[i].real + v[i].imag * v[i].imag
        norm_v = np.sqrt(norm_v)
        for i in range(m):
            v[i] = v[i] / norm_v

        # P = I − 2 v v*, von links auf die Zeilen k+1..n−1
        for j in range(n):
            s = 0.0j
            for i in range(m):
                s += v[i].conjugate() * h[k + 1 + i, j]
            for i in range(m):
                h[k + 1 + i, j] -= 2.0 * v[i] * s
        # von rechts auf die Spalten k+1..n−1
        for i in range(n):
            s = 0.0j
            for j in range(m):
                s += h[i, k + 1 + j] * v[j]
            for j in range(m):
                h[i, k + 1 + j] -= 2.0 * s * v[j].conjugate()
        for i in range(n):
            s = 0.0j
            for j in range(m):
                s += q[i, k + 1 + j] * v[j]
            for j in range(m):
                q[i, k + 1 + j] -= 2.0 * s * v[j].conjugate()
        for i in range(k + 2, n):
            h[i, k] = 0.0j


@njit(cache=True, nogil=True)
def _givens(x, y):
    """Rotation G = [[c, s], [−s̄, c]] mit reellem c, so dass G·(x, y) = (·, 0)."""
    ax = abs(x)
    r = math.hypot(ax, abs(y))
    if r == 0.0:
        return 1.0, 0.0j
    if ax == 0.0:
        return 0.0, 1.0 + 0.0j
    return ax / r, (x / ax) * y.conjugate() / r


@njit(cache=True, nogil=True)
def _schur_kernel(h, z, max_sweeps):
    """Komplexe Schur-Form per Wilkinson-verschobener QR-Iteration.

    h muss obere Hessenberg-Form haben und wird in-place trianguliert,
    z sammelt die Rotationen. Gibt False zurück, wenn ein Eigenwert
    mehr als max_sweeps Iterationen braucht.
    """
    n = h.shape[0]
    ulp = 2.220446049250313e-16
    # absolute Untergrenze wie in LAPACK zlahqr
    smlnum = 2.2250738585072014e-308 * (n / ulp)

    cs = np.empty(n, dtype=np.float64)
    sn = np.empty(n, dtype=np.complex128)
    hi = n - 1
    its = 0
    while hi > 0:
        l = hi
        while l > 0:
            sub = abs(h[l, l - 1])
            if sub <= smlnum:
                h[l, l - 1] = 0.0j
                break
            tst = abs(h[l - 1, l - 1]) + abs(h[l, l])
            if tst == 0.0:
                if l - 2 >= 0:
                    tst += abs(h[l - 1, l - 2])
                if l + 1 <= hi:
                    tst += abs(h[l + 1, l])
            if sub <= ulp * tst:
                # Ahues-Tisseur-Kriterium
                up = abs(h[l - 1, l])
                ab = max(sub, up)
                ba = min(sub, up)
                diff = abs(h[l - 1, l - 1] - h[l, l])
                aa = max(abs(h[l, l]), diff)
                bb = min(abs(h[l, l]), diff)
                s = aa + ab
                if ba * (ab / s) <= max(smlnum, ulp * (bb * (aa / s))):
                    h[l, l - 1] = 0.0j
                    break
            l -= 1
        if l == hi:
            hi -= 1
            its = 0
            continue

        its += 1
        if its > max_sweeps:
            return False

        if its % 10 == 0:
            # Ausnahmeshift gegen Zyklen
            mu = h[hi, hi] + abs(h[hi, hi - 1])
        else:
            a = h[hi - 1, hi - 1]
            b = h[hi - 1, hi]
            c = h[hi, hi - 1]
            d = h[hi, hi]
            half = 0.5 * (a - d)
            disc = np.sqrt(half * half + b * c)
            mu1 = d + half + disc
            mu2 = d + half - disc
            mu = mu1 if abs(mu1 - d) <= abs(mu2 - d) else mu2

        for i in range(l, hi + 1):
            h[i, i] -= mu
        for k in range(l, hi):
            c_k, s_k = _givens(h[k, k], h[k + 1, k])
            cs[k] = c_k
            sn[k] = s_k
            for j in range(k, n):
                t1 = h[k, j]
                t2 = h[k + 1, j]
                h[k, j] = c_k * t1 + s_k * t2
                h[k + 1, j] = -s_k.conjugate() * t1 + c_k * t2
        for k in range(l, hi):
            c_k = cs[k]
            s_k = sn[k]
            top = min(k + 2, hi)
            for i in range(top + 1):
                t1 = h[i, k]
                t2 = h[i, k + 1]
                h[i, k] = c_k * t1 + s_k.conjugate() * t2
                h[i, k + 1] = -s_k * t1 + c_k * t2
            for i in range(n):
                t1 = z[i, k]
                t2 = z[i, k + 1]
                z[i, k] = c_k * t1 + s_k.conjugate() * t2
                z[i, k + 1] = -s_k * t1 + c_k * t2
        for i in range(l, hi + 1):
            h[i, i] += mu
    return True


@njit(cache=True, nogil=True)
def _triangular_eigvecs(t):
    """Eigenvektoren einer oberen Dreiecksmatrix durch Rückwärtseinsetzen.

    Zu kleine Nenner werden wie in LAPACK ztrevc auf smin angehoben.
    """
    n = t.shape[0]
    norm_t = 0.0
    for i in range(n):
        for j in range(i, n):
            norm_t = max(norm_t, abs(t[i, j]))
    smin = max(2.220446049250313e-16 * norm_t, 1e-300)
    y = np.zeros((n, n), dtype=np.complex128)
    for j in range(n):
        y[j, j] = 1.0
        lam = t[j, j]
        for i in range(j - 1, -1, -1):
            s = 0.0j
            for m in range(i + 1, j + 1):
                s += t[i, m] * y[m, j]
            den = t[i, i] - lam
            if abs(den) < smin:
                den = smin + 0.0j
            y[i, j] = -s / den
            big = abs(y[i, j])
            if big > 1e150:
                for m in range(i, j + 1):
                    y[m, j] = y[m, j] / big
    return y


def _schur(a, max_sweeps):
    # auf max|a| = 1 skaliert, sonst unterlaufen Normen winziger Blöcke
    scale = float(np.max(np.abs(a)))
    z = np.eye(a.shape[0], dtype=np.complex128)
    if scale == 0.0:
        return a.copy(), z
    h = a / scale
    _hessenberg_kernel(h, z)
    if not _schur_kernel(h, z, max_sweeps):
        raise NoConvergence(f"QR-Iteration nach {max_sweeps} Sweeps pro Eigenwert nicht konvergiert "
                            f"(Dimension {a.shape[0]}, Skala {scale:.3g})")
    return h * scale, z


def eigvals_general(M, max_sweeps=MAX_QR_SWEEPS):
    """Nur die Eigenwerte (Diagonale der Schur-Form)."""
    t, _ = _schur(as_complex_matrix(M), max_sweeps)
    return np.diag(t).copy()


def eig_general(M, max_sweeps=MAX_QR_SWEEPS):
    """Vollständige Eigenzerlegung einer allgemeinen komplexen Matrix.

    Args:
        M: Quadratische Matrix (d ≤ 256).
        max_sweeps (int): QR-Sweeps pro Eigenwert bis NoConvergence.

    Returns:
        SpectralDecomposition: Rechte Eigenvektoren auf Norm 1, linke als Inverse.

    Raises:
        NoConvergence: Iterationslimit überschritten.
        DefectiveMatrix: Konditionszahl der Eigenvektormatrix über 1e12.
    """
    a = as_complex_matrix(M)
    t, z = _schur(a, max_sweeps)
    right = z @ _triangular_eigvecs(t)
    right /= np.linalg.norm(right, axis=0)
    cond = float(np.linalg.cond(right))
    if not np.isfinite(cond) or cond > DEFECTIVE_COND:
        raise DefectiveMatrix(f"Eigenvektormatrix schlecht konditioniert (cond = {cond:.3g})")
    left = np.linalg.inv(right)
    return SpectralDecomposition(values=np.diag(t).copy(), right=right, left=left, cond=cond)


def _near_cut(values):
    values = np.asarray(values)
    return bool(np.any((values.real < 0.0) & (np.abs(values.imag) <= BRANCH_CUT_TOL)))


_CUT_FUNCTIONS = (np.sqrt, np.log, np.emath.sqrt, np.emath.log, cmath.sqrt, cmath.log)


def _apply(f, values):
    try:
        out = f(values)
    except TypeError:
        out = [f(v) for v in values]
    return np.asarray(out, dtype=np.complex128)


def mat_func(M, f):
    """Spektrale Matrixfunktion right · diag(f(λ)) · left mit Hauptzweigen.

    Für sqrt und log wird eine BranchCutWarning ausgegeben, wenn Eigenwerte
    auf der negativen reellen Achse liegen.
    """
    dec = eig_general(M)
    if any(f is g for g in _CUT_FUNCTIONS) and _near_cut(dec.values):
        warnings.warn("Eigenwerte auf dem Verzweigungsschnitt", BranchCutWarning, stacklevel=2)
    return (dec.right * _apply(f, dec.values)) @ dec.left


def expm_shifted(M, s):
    """exp(M − s·I) mit protokolliertem Shift, damit Aufrufer renormieren können."""
    a = as_complex_matrix(M)
    a[np.diag_indices_from(a)] -= s
    return ShiftedExp(matrix=mat_func(a, np.exp), shift=complex(s))


def _fold(mu):
    """Bildet ±μ auf den Vertreter in der Hauptzweig-Halbebene ab."""
    tol = BRANCH_CUT_TOL * np.abs(mu)
    flip = (mu.real < -tol) | ((np.abs(mu.real) <= tol) & (mu.imag < 0.0))
    return np.where(flip, -mu, mu)


def _block_roots(a, b):
    """Wurzeln der Eigenwerte von a·b aus der erweiterten Matrix [[0, a], [b, 0]].

    Deren Spektrum ist ±√λ(a·b). Sind a und b gleich skaliert, kommen die
    Wurzeln mit absolutem Fehler von der Größe eps·‖a‖ heraus, ohne den
    Verlust, den √ auf kleine λ überträgt.
    Jede Wurzel erscheint zweimal (einmal pro Vorzeichen).
    """
    m = a.shape[0]
    k = np.zeros((2 * m, 2 * m), dtype=np.complex128)
    k[:m, m:] = a
    k[m:, :m] = b
    t, _ = _schur(k, MAX_QR_SWEEPS)
    return _fold(np.diag(t).copy())


def _signed_to_reference(roots, reference):
    """Wählt für jede Wurzel das Vorzeichen, das der zugeordneten Referenz am nächsten liegt."""
    refs = np.repeat(np.asarray(reference, dtype=np.complex128), 2)
    cost = np.minimum(np.abs(roots[:, None] - refs[None, :]), np.abs(roots[:, None] + refs[None, :]))
    rows, cols = linear_sum_assignment(cost)
    signs = np.ones(roots.shape[0])
    flip = np.abs(roots[rows] + refs[cols]) < np.abs(roots[rows] - refs[cols])
    signs[rows[flip]] = -1.0
    return roots * signs


def trace_sqrt_product(A, B, blocks=None, reference=None):
    """Σ_i √λ_i(A·B).

    Über die Ähnlichkeit spec(B^{1/2} A B^{1/2}) = spec(A B) ist das die
    Spur von √(B^{1/2} A B^{1/2}), solange B^{1/2} invertierbar ist. Es werden
    nur Eigenwerte gebraucht, Defektivität von A·B spielt daher keine Rolle.
    Ohne Referenz gilt der Hauptzweig. Mit Referenz wird jede Wurzel dem
    Referenzwert zugeordnet (Zuordnung per linear_sum_assignment) und ihr
    Vorzeichen so gewählt, dass sie ihm am nächsten liegt.

    Args:
        A, B: Matrizen gleicher Dimension.
        blocks: Optionale Zerlegung der Indizes in invariante Blöcke, in
            denen A und B beide blockdiagonal sind.
        reference: Optional d erwartete Wurzeln, Reihenfolge wie die Indizes.

    Returns:
        TraceSqrtResult: Wert und Flag für Eigenwerte am Verzweigungsschnitt.
    """
    a = as_complex_matrix(A)
    b = as_complex_matrix(B)
    if a.shape != b.shape:
        raise InvalidParameters(f"Dimensionen passen nicht: {a.shape} und {b.shape}")
    d = a.shape[0]
    if reference is not None:
        reference = np.asarray(reference, dtype=np.complex128)
        if reference.shape != (d,):
            raise InvalidParameters(f"Referenz der Länge {d} erwartet, erhalten: Form {reference.shape}")

    if blocks is None:
        blocks = (tuple(range(d)),)
    else:
        covered = sorted(i for block in blocks for i in block)
        if covered != list(range(d)):
            raise InvalidParameters("Blöcke zerlegen die Indexmenge nicht vollständig")

    parts = []
    for block in blocks:
        ix = np.ix_(block, block)
        roots = _block_roots(a[ix], b[ix])
        if reference is not None:
            roots = _signed_to_reference(roots, reference[list(block)])
        parts.append(roots)
    roots = np.concatenate(parts)

    spectrum = roots * roots
    branch_cut = _near_cut(spectrum)
    if branch_cut:
        logger.debug("trace_sqrt_product: Eigenwerte am Verzweigungsschnitt %s", spectrum[spectrum.real < 0])
    return TraceSqrtResult(value=complex(0.5 * roots.sum()), branch_cut=branch_cut)


def canonical_sort(values, fuzz=1e-10):
    """Sortiert nach Realteil, bei Gleichstand (bis fuzz) nach Imaginärteil."""
    ordered = sorted((complex(v) for v in values), key=lambda z: (z.real, z.imag))
    out = []
    group = []
    for z in ordered:
        if group and abs(z.real - group[0].real) > fuzz:
            out.extend(sorted(group, key=lambda w: w.imag))
            group = []
        group.append(z)
    out.extend(sorted(group, key=lambda w: w.imag))
    return np.array(out, dtype=np.complex128)
