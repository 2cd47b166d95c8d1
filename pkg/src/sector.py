# src/sector.py
"""Impulssektor h_k = H_k + H_{−k} auf der 16-dimensionalen Fock-Basis.

Modenreihenfolge (α_k, β_k, α_{−k}, β_{−k}) mit Index 0..3, ein Basiszustand
ist eine 4-Bit-Besetzungsmaske. Der Erzeuger von Mode i auf Maske m trägt den
Faktor (−1)^(Anzahl besetzter Moden < i); damit ist das aufsteigend geordnete
Produkt der Erzeuger auf |0⟩ genau der Basiszustand mit Vorzeichen +1.

Alle Vorzeichen der geschlossenen Eigenzustände folgen dieser Konvention.
Operatorketten werden so notiert, wie sie in der Herleitung stehen, und über
fock_state() in Masken mit Umordnungsvorzeichen übersetzt.
"""
import cmath
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import matfun
from .errors import InvalidParameters, SingularDenominator, SingularGram
from .model import CouplingParams, dispersion_table

logger = logging.getLogger(__name__)

MODE_ORDER = ("alpha_k", "beta_k", "alpha_-k", "beta_-k")
A_K, B_K, A_MK, B_MK = 0, 1, 2, 3
DIM = 16

# Moden-Umbenennung k ↔ −k
MIRROR = (A_MK, B_MK, A_K, B_K)

EVEN_MASKS = tuple(m for m in range(DIM) if bin(m).count("1") % 2 == 0)
ODD_MASKS = tuple(m for m in range(DIM) if bin(m).count("1") % 2 == 1)

# Exakt invariante Unterräume von h_k und die Niveaus, die darin liegen
INVARIANT_BLOCKS = ((0, 5, 10, 15, 9, 6), (3,), (12,), (1, 2, 7, 11), (4, 8, 13, 14))
BLOCK_LEVELS = ((1, 2, 3, 4, 5, 6), (7,), (8,), (9, 10, 11, 12), (13, 14, 15, 16))

SINGULAR_TOL = 1e-12
CLUSTER_TOL = 1e-8
GRAM_COND_MAX = 1e12


def reorder_sign(modes):
    """Vorzeichen, das beim Sortieren einer Erzeugerkette entsteht (0 bei doppelter Mode)."""
    modes = list(modes)
    if len(set(modes)) != len(modes):
        return 0
    inversions = sum(1 for i in range(len(modes)) for j in range(i + 1, len(modes)) if modes[i] > modes[j])
    return -1 if inversions % 2 else 1


def fock_state(modes):
    """Übersetzt die Kette modes[0]† modes[1]† … |0⟩ in (Maske, Vorzeichen)."""
    sign = reorder_sign(modes)
    mask = 0
    for mode in modes:
        mask |= 1 << mode
    return mask, sign


def _occupied(mask):
    return [i for i in range(4) if mask >> i & 1]


def creation_operator(i):
    """Matrix des Erzeugers f_i† in der Konvention der Modul-Dokumentation."""
    op = np.zeros((DIM, DIM))
    for m in range(DIM):
        if m >> i & 1:
            continue
        below = bin(m & ((1 << i) - 1)).count("1")
        op[m | 1 << i, m] = -1.0 if below % 2 else 1.0
    return op


_CDAG = tuple(creation_operator(i) for i in range(4))
_C = tuple(op.T for op in _CDAG)
_NUM = tuple(_CDAG[i] @ _C[i] for i in range(4))


def permute_modes(vec, perm):
    """Wendet die Moden-Umbenennung i → perm[i] auf einen 16-Vektor an."""
    vec = np.asarray(vec)
    out = np.zeros(DIM, dtype=np.complex128)
    for mask in range(DIM):
        amp = vec[mask]
        if amp == 0:
            continue
        new_mask, sign = fock_state([perm[i] for i in _occupied(mask)])
        out[new_mask] += sign * amp
    return out


def _mirror_matrix():
    p = np.zeros((DIM, DIM))
    for mask in range(DIM):
        e = np.zeros(DIM)
        e[mask] = 1.0
        p[:, mask] = permute_modes(e, MIRROR).real
    return p


def sector_matrix(k, eta, xi):
    """h_k als 16×16-Matrix, ohne Bereichsprüfung von k."""
    a_dag, b_dag, c_dag, d_dag = _CDAG
    a, b, c, d = _C
    big_c = 2.0 * math.cos(k / 2.0)
    big_s = 2.0 * math.sin(k / 2.0)
    w = cmath.exp(0.5j * k)
    wc = w.conjugate()
    u = complex(eta, xi)
    v = complex(eta, -xi)

    h = big_c * w * (a_dag @ b) + big_c * wc * (b_dag @ a)
    h = h + big_c * wc * (c_dag @ d) + big_c * w * (d_dag @ c)
    h = h + 1j * big_s * w * (a_dag @ d_dag) - 1j * big_s * wc * (d @ a)
    h = h - 1j * big_s * wc * (c_dag @ b_dag) + 1j * big_s * w * (b @ c)
    h = h - 2.0 * u * (_NUM[A_K] + _NUM[A_MK]) - 2.0 * v * (_NUM[B_K] + _NUM[B_MK])
    h = h + 4.0 * eta * np.eye(DIM)
    return np.asarray(h, dtype=np.complex128)


@dataclass(frozen=True, eq=False)
class SectorHamiltonian:
    k: float
    matrix: np.ndarray
    params: CouplingParams


@dataclass(frozen=True, eq=False)
class BiorthogonalEigensystem:
    """Biorthonormales Eigensystem eines Sektors.

    Spalte n−1 von right und Zeile n−1 von left gehören zum Niveau n,
    values[n−1] ist der Eigenwert von h_k (also 2ε^n). pairing[n−1] nennt den
    Index des linken Vektors in der Eingabereihenfolge, der dem Niveau n
    zugeordnet wurde.
    """
    values: np.ndarray
    right: np.ndarray
    left: np.ndarray
    pairing: tuple
    cond: float
    method: str = "analytic"

    def projector(self, n):
        return np.outer(self.right[:, n - 1], self.left[n - 1, :])

    def reconstruct(self):
        return (self.right * self.values) @ self.left


def _check_momentum(k):
    if not (0.0 < k < math.pi):
        raise InvalidParameters(f"k muss in (0, π) liegen, erhalten: {k}")


def _check_level(n):
    if not (1 <= n <= 16):
        raise InvalidParameters(f"Niveau n muss in [1, 16] liegen, erhalten: {n}")


def build_sector_hamiltonian(k, p):
    """Baut h_k für k ∈ (0, π); die skalaren 2η-Anteile von H_{±k} stehen auf der Diagonale."""
    _check_momentum(k)
    return SectorHamiltonian(k=k, matrix=sector_matrix(k, p.eta, p.xi), params=p)


def _guard(value, what):
    if abs(value) < SINGULAR_TOL:
        raise SingularDenominator(f"Nenner {what} verschwindet (|{what}| = {abs(value):.3g})")
    return value


def _assemble(terms):
    vec = np.zeros(DIM, dtype=np.complex128)
    for modes, amp in terms:
        mask, sign = fock_state(modes)
        vec[mask] += sign * amp
    return vec


def _even_state(k, eta, xi, eps):
    big_c = 2.0 * math.cos(k / 2.0)
    big_s = 2.0 * math.sin(k / 2.0)
    w = cmath.exp(0.5j * k)
    return _assemble((
        ((), -1j * big_s / _guard(eps - 2.0 * eta, "ε−2η")),
        ((A_K, A_MK), big_c / _guard(eps + 2j * xi, "ε+2iξ")),
        ((B_K, B_MK), big_c / _guard(eps - 2j * xi, "ε−2iξ")),
        ((A_K, B_K, A_MK, B_MK), 1j * big_s / _guard(eps + 2.0 * eta, "ε+2η")),
        ((A_K, B_MK), w),
        ((B_K, A_MK), w.conjugate()),
    ))


def _odd_state(k, eta, xi, eps):
    """Zustand im ungeraden Block über α_k† mit Eigenwert 2·eps.

    Zeilen β_k†, α_{−k}†α_k†β_k† und α_k†β_{−k}†β_k† der Eigenwertgleichung
    werden eliminiert; die Komponente auf α_k† bleibt frei.
    """
    big_c = 2.0 * math.cos(k / 2.0)
    big_s = 2.0 * math.sin(k / 2.0)
    wc = cmath.exp(-0.5j * k)
    u = complex(eta, xi)
    v = complex(eta, -xi)
    e = 2.0 * eps

    x1 = (e + 2.0 * v) * (e * e - 4.0 * u * u) - 4.0 * e + 8.0 * u * math.cos(k)
    y4 = 8j * u * math.sin(k)
    x2 = wc * (big_c * x1 - 1j * big_s * y4) / _guard(e - 2.0 * u, "2ε−2(η+iξ)")
    x3 = wc * (1j * big_s * x1 - big_c * y4) / _guard(e + 2.0 * u, "2ε+2(η+iξ)")

    vec = _assemble((
        ((A_K,), x1),
        ((B_K,), x2),
        ((A_MK, A_K, B_K), x3),
        ((A_K, B_MK, B_K), y4),
    ))
    if np.linalg.norm(vec) < 1e-10 * (1.0 + abs(e)) ** 3:
        raise SingularDenominator(f"Geschlossene Form verschwindet bei k={k:.6g}, ε={eps:.6g}")
    return vec


def closed_form_state(n, k, eta, xi, eps):
    """Ungenormter Eigenzustand zum Niveau n für einen vorgegebenen Wert eps = ε^n."""
    if n <= 5:
        return _even_state(k, eta, xi, eps)
    if n == 6:
        w = cmath.exp(0.5j * k)
        return _assemble((((A_K, B_MK), w / math.sqrt(2.0)), ((B_K, A_MK), -w.conjugate() / math.sqrt(2.0))))
    if n == 7:
        return _assemble((((A_K, B_K), 1.0),))
    if n == 8:
        return _assemble((((A_MK, B_MK), 1.0),))
    if n <= 12:
        return _odd_state(k, eta, xi, eps)
    # Spiegelblock über α_{−k}†: Formel bei −k, dann k ↔ −k umbenennen
    return permute_modes(_odd_state(-k, eta, xi, eps), MIRROR)


def _raw_right_matrix(k, eta, xi, table):
    return np.column_stack([closed_form_state(n, k, eta, xi, table[n - 1]) for n in range(1, 17)])


def analytic_right_eigenstate(n, k, p):
    """Rechter Eigenzustand |n̄⟩_k ohne Normierung (Ω^n übernimmt biorthonormalize).

    Raises:
        SingularDenominator: Ein Nenner der geschlossenen Form verschwindet.
    """
    _check_level(n)
    _check_momentum(k)
    eps = dispersion_table(k, p.polar)[n - 1]
    return closed_form_state(n, k, p.eta, p.xi, eps)


def analytic_left_eigenstate(n, k, p):
    """Linker Eigenzustand ⟨n(ξ)|_k = (|n̄(−ξ)⟩_k)†.

    Der Eigenwert des Kovektors ist konj(2ε^n); für reelles ε^n ist das
    das Niveau n selbst.
    """
    return analytic_right_eigenstate(n, k, p.mirrored()).conj()


def _clusters(values, tol):
    n = len(values)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(values[i] - values[j]) < tol:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values(), key=lambda g: g[0])


def biorthonormalize(rights, lefts, values, left_values=None, tol=CLUSTER_TOL):
    """Paart und skaliert linke und rechte Eigenvektoren, bis L·R = 1 gilt.

    Args:
        rights: 16×16, Spalten sind rechte Eigenvektoren.
        lefts: 16×16, Zeilen sind linke Eigenvektoren.
        values: Eigenwerte der rechten Vektoren.
        left_values: Eigenwerte der linken Vektoren (Standard: values).
        tol (float): Cluster-Schwelle für entartete Eigenwerte.

    Returns:
        BiorthogonalEigensystem

    Raises:
        SingularGram: Gram-Matrix eines Clusters singulär (Ausnahmepunkt).
    """
    rights = np.array(rights, dtype=np.complex128)
    lefts = np.array(lefts, dtype=np.complex128)
    values = np.asarray(values, dtype=np.complex128)
    left_values = values if left_values is None else np.asarray(left_values, dtype=np.complex128)

    new_right = rights.copy()
    new_left = np.zeros_like(lefts)
    free = set(range(len(left_values)))
    pairing = list(range(len(values)))

    for cluster in _clusters(values, tol):
        candidates = sorted(j for j in free if np.min(np.abs(left_values[j] - values[cluster])) < tol)
        if len(candidates) != len(cluster):
            raise SingularGram(f"Cluster bei {values[cluster[0]]:.6g}: {len(cluster)} rechte, "
                               f"{len(candidates)} linke Vektoren")
        gram = lefts[candidates] @ rights[:, cluster]
        cond = np.linalg.cond(gram)
        if not np.isfinite(cond) or cond > GRAM_COND_MAX:
            raise SingularGram(f"Gram-Matrix bei {values[cluster[0]]:.6g} singulär (cond = {cond:.3g})")

        rows, cols = linear_sum_assignment(-np.abs(gram))
        chosen = [0] * len(cluster)
        for row, col in zip(rows, cols):
            chosen[col] = candidates[row]
        free.difference_update(chosen)
        for level, j in zip(cluster, chosen):
            pairing[level] = j

        block_left = lefts[chosen]
        gram = block_left @ rights[:, cluster]
        diag = np.diag(gram)
        off = gram - np.diag(diag)
        if np.max(np.abs(off), initial=0.0) <= 1e-12 * np.max(np.abs(diag)):
            # symmetrische Aufteilung: R/√g und L/√g
            root = np.sqrt(diag)
            new_right[:, cluster] = rights[:, cluster] / root
            new_left[cluster] = block_left / root[:, None]
        else:
            new_left[cluster] = np.linalg.solve(gram, block_left)

    return BiorthogonalEigensystem(
        values=values.copy(),
        right=new_right,
        left=new_left,
        pairing=tuple(pairing),
        cond=float(np.linalg.cond(new_right)),
    )


def _orthonormal_gauge(system, tol=CLUSTER_TOL):
    """Hermitescher Fall: Cluster orthonormalisieren und L = R† setzen."""
    right = system.right.copy()
    for cluster in _clusters(system.values, tol):
        q, _ = np.linalg.qr(right[:, cluster])
        right[:, cluster] = q
    return BiorthogonalEigensystem(
        values=system.values, right=right, left=right.conj().T,
        pairing=system.pairing, cond=float(np.linalg.cond(right)), method=system.method,
    )


def _analytic_system(k, p, table):
    rights = _raw_right_matrix(k, p.eta, p.xi, table)
    lefts = _raw_right_matrix(k, p.eta, -p.xi, table).conj().T
    values = 2.0 * table
    return biorthonormalize(rights, lefts, values, left_values=values.conj())


def _numeric_system(k, p, table):
    h = sector_matrix(k, p.eta, p.xi)
    target = 2.0 * table
    values = np.zeros(DIM, dtype=np.complex128)
    right = np.zeros((DIM, DIM), dtype=np.complex128)
    left = np.zeros((DIM, DIM), dtype=np.complex128)
    pairing = [0] * DIM
    offset = 0

    for masks, levels in zip(INVARIANT_BLOCKS, BLOCK_LEVELS):
        idx = np.array(masks)
        dec = matfun.eig_general(h[np.ix_(idx, idx)])
        wanted = target[[n - 1 for n in levels]]
        rows, cols = linear_sum_assignment(np.abs(dec.values[:, None] - wanted[None, :]))
        for row, col in zip(rows, cols):
            level = levels[col]
            values[level - 1] = dec.values[row]
            right[idx, level - 1] = dec.right[:, row]
            left[level - 1, idx] = dec.left[row, :]
            pairing[level - 1] = offset + row
        offset += len(masks)

    return BiorthogonalEigensystem(
        values=values, right=right, left=left, pairing=tuple(pairing),
        cond=float(np.linalg.cond(right)), method="numeric",
    )


def sector_eigensystem(k, p, method="auto"):
    """Biorthonormales Eigensystem von h_k.

    Args:
        k (float): Impuls in (0, π).
        p (CouplingParams): Modellparameter.
        method (str): "analytic", "numeric" oder "auto" (analytisch, bei
            singulären Nennern oder Gram-Matrizen numerisch).

    Returns:
        BiorthogonalEigensystem
    """
    _check_momentum(k)
    table = dispersion_table(k, p.polar)
    if method == "analytic":
        system = _analytic_system(k, p, table)
    elif method == "numeric":
        system = _numeric_system(k, p, table)
    elif method == "auto":
        try:
            system = _analytic_system(k, p, table)
        except (SingularDenominator, SingularGram) as e:
            logger.debug("Analytischer Pfad bei k=%.6g, eta=%.6g, xi=%.6g nicht anwendbar (%s), numerisch weiter",
                         k, p.eta, p.xi, e)
            system = _numeric_system(k, p, table)
    else:
        raise InvalidParameters(f"Unbekannte Methode: {method!r} (analytic, numeric, auto)")

    if p.xi == 0.0:
        system = _orthonormal_gauge(system)
    return system


def mirror_similarity_residual(k, p):
    """max |P h(k) Pᵀ − h(−k)| für die Umbenennung α_k ↔ α_{−k}, β_k ↔ β_{−k}."""
    perm = _mirror_matrix()
    return float(np.max(np.abs(perm @ sector_matrix(k, p.eta, p.xi) @ perm.T - sector_matrix(-k, p.eta, p.xi))))
