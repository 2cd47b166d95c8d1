# src/oracle.py
"""Dichte Referenzrechnungen für kleine Ketten.

Wird nur von den Tests und dem Befehl validate benutzt. Alle Matrizen sind
höchstens 256-dimensional; die Eigenwerte kommen hier aus
numpy.linalg bzw. scipy.linalg und nicht aus matfun.
"""
import logging
import math
from dataclasses import dataclass
from functools import reduce

import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from .errors import InvalidParameters, SizeCap
from .model import momentum_grid
from .sector import sector_matrix

logger = logging.getLogger(__name__)

MAX_SITES = 8
MAX_SUM_N = 4

_SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
_SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128)
_LOWER = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=np.complex128)
_EYE2 = np.eye(2, dtype=np.complex128)


@dataclass(frozen=True, eq=False)
class SpinChainDense:
    sites: int
    matrix: np.ndarray
    params: object


@dataclass(frozen=True, eq=False)
class FermionSumDense:
    N: int
    matrix: np.ndarray
    params: object


def _check_sites(sites):
    if int(sites) != sites or sites < 2 or sites % 2:
        raise InvalidParameters(f"Anzahl der Plätze muss gerade und >= 2 sein, erhalten: {sites}")
    if sites > MAX_SITES:
        raise SizeCap(f"2N = {sites} überschreitet die Grenze von {MAX_SITES} Plätzen")


def _nested_kron(ops):
    return reduce(np.kron, ops)


def _site_operator(op, j, sites):
    """op auf Platz j (0-basiert), Identität sonst."""
    return _nested_kron([op if i == j else _EYE2 for i in range(sites)])


def field_profile(p, sites):
    """g_j = η + i(−1)^j ξ für j = 1..2N."""
    return [complex(p.eta, (-1) ** j * p.xi) for j in range(1, sites + 1)]


def spin_hamiltonian_dense(p, sites=None):
    """−J Σ_j (σ^z_j σ^z_{j+1} + g_j σ^x_j) mit periodischem Abschluss.

    Raises:
        SizeCap: Für mehr als 8 Plätze.
    """
    sites = 2 * p.N if sites is None else sites
    _check_sites(sites)
    dim = 2 ** sites
    h = np.zeros((dim, dim), dtype=np.complex128)
    for j, g in enumerate(field_profile(p, sites)):
        nxt = (j + 1) % sites
        h -= p.J * (_site_operator(_SIGMA_Z, j, sites) @ _site_operator(_SIGMA_Z, nxt, sites))
        h -= p.J * g * _site_operator(_SIGMA_X, j, sites)
    return SpinChainDense(sites=sites, matrix=h, params=p)


def spin_parity(sites):
    """Π = Π_j σ^x_j im Spinraum."""
    _check_sites(sites)
    return _nested_kron([_SIGMA_X] * sites)


def jordan_wigner_annihilators(sites):
    """c_j = σ^z ⊗ … ⊗ σ^z ⊗ a ⊗ 1 ⊗ … mit a = |0⟩⟨1|, n_j = c_j†c_j."""
    _check_sites(sites)
    ops = []
    for j in range(sites):
        ops.append(_nested_kron([_SIGMA_Z] * j + [_LOWER] + [_EYE2] * (sites - j - 1)))
    return ops


def fermion_parity(sites):
    """(−1)^{N_f} als Diagonale in der Fock-Basis."""
    _check_sites(sites)
    return np.array([-1.0 if bin(m).count("1") % 2 else 1.0 for m in range(2 ** sites)])


def parity_projector(sites, sigma):
    if sigma not in (1, -1):
        raise InvalidParameters(f"Parität muss +1 oder -1 sein, erhalten: {sigma}")
    return np.diag((1.0 + sigma * fermion_parity(sites)) / 2.0)


def fermion_sector_hamiltonian(p, sites, sigma):
    """Fermionischer H_σ nach Jordan-Wigner auf dem vollen Fock-Raum.

    Der Randterm trägt +Jσ, was c_{2N+1} = −σ c_1 entspricht; das Feld ist
    Σ_j g_j (1 − 2 c_j†c_j).
    """
    if sigma not in (1, -1):
        raise InvalidParameters(f"Parität muss +1 oder -1 sein, erhalten: {sigma}")
    c = jordan_wigner_annihilators(sites)
    cd = [op.conj().T for op in c]
    eye = np.eye(2 ** sites, dtype=np.complex128)
    h = np.zeros_like(eye)
    for j in range(sites - 1):
        h -= p.J * (cd[j] @ c[j + 1] + cd[j + 1] @ c[j] + cd[j] @ cd[j + 1] + c[j + 1] @ c[j])
    last = sites - 1
    h += p.J * sigma * (cd[last] @ c[0] + cd[0] @ c[last] + cd[last] @ cd[0] + c[0] @ c[last])
    for j, g in enumerate(field_profile(p, sites)):
        h -= p.J * g * (eye - 2.0 * cd[j] @ c[j])
    return h


def jw_sector_spectrum(p, sites, sigma):
    """Eigenwerte von H_σ eingeschränkt auf den Unterraum mit Parität σ."""
    h = fermion_sector_hamiltonian(p, sites, sigma)
    keep = np.flatnonzero(fermion_parity(sites) == sigma)
    return np.linalg.eigvals(h[np.ix_(keep, keep)])


def fermion_sum_hamiltonian(p, N=4):
    """−J Σ_k h_k als Kronecker-Summe über die Impulse des σ=+ Gitters."""
    if N > MAX_SUM_N:
        raise SizeCap(f"Kronecker-Summe für N = {N} wäre {16 ** (N // 2)}-dimensional")
    ks = momentum_grid(N, 1).paired
    blocks = [sector_matrix(k, p.eta, p.xi) for k in ks]
    dim = 16 ** len(blocks)
    h = np.zeros((dim, dim), dtype=np.complex128)
    for i, block in enumerate(blocks):
        ops = [np.eye(16, dtype=np.complex128)] * len(blocks)
        ops[i] = block
        h += _nested_kron(ops)
    return FermionSumDense(N=N, matrix=-p.J * h, params=p)


def _gibbs_root(h, beta):
    """ρ^{1/2} = e^{−βH/2} / √tr e^{−βH} über den halben Exponenten."""
    a = -beta * h
    shift = np.max(np.linalg.eigvals(a).real)
    eye = np.eye(a.shape[0])
    total = np.trace(scipy.linalg.expm(a - shift * eye))
    return scipy.linalg.expm(0.5 * (a - shift * eye)) / np.sqrt(total)


def fermion_sum_fidelity(p1, p2, beta, N=4):
    """Fidelity der dichten Gibbs-Zustände auf dem 16^{N/2}-dimensionalen Raum.

    Die Wurzeln von spec(ρ₁ρ₂) kommen als ±-Paare aus der erweiterten Matrix
    [[0, A], [B, 0]] mit A = ρ₁^{1/2}ρ₂^{1/2} und B = ρ₂^{1/2}ρ₁^{1/2}. Das
    Vorzeichen jeder Wurzel folgt dem nächstgelegenen Eigenwert von A.
    """
    if not (math.isfinite(beta) and beta >= 0.0):
        raise InvalidParameters(f"β muss endlich und >= 0 sein, erhalten: {beta}")
    if beta == 0.0:
        return 1.0
    root1 = _gibbs_root(fermion_sum_hamiltonian(p1, N).matrix, beta)
    root2 = _gibbs_root(fermion_sum_hamiltonian(p2, N).matrix, beta)
    a = root1 @ root2
    b = root2 @ root1
    dim = a.shape[0]
    augmented = np.zeros((2 * dim, 2 * dim), dtype=np.complex128)
    augmented[:dim, dim:] = a
    augmented[dim:, :dim] = b
    roots = np.linalg.eigvals(augmented)
    refs = np.repeat(np.linalg.eigvals(a), 2)
    plus = np.abs(roots[:, None] - refs[None, :])
    minus = np.abs(roots[:, None] + refs[None, :])
    rows, cols = linear_sum_assignment(np.minimum(plus, minus))
    signs = np.where(minus[rows, cols] < plus[rows, cols], -1.0, 1.0)
    return abs(0.5 * np.sum(signs * roots[rows]))


def _psd_sqrt(m):
    values, vectors = scipy.linalg.eigh(m)
    return (vectors * np.sqrt(np.clip(values, 0.0, None))) @ vectors.conj().T


def uhlmann_fidelity(rho, sigma):
    """tr √(√σ ρ √σ) = ‖√ρ √σ‖_* für hermitesche Dichtematrizen.

    Die Nuklearnorm vermeidet die Wurzel aus kleinen Eigenwerten von √σ ρ √σ.
    """
    return float(np.sum(scipy.linalg.svdvals(_psd_sqrt(rho) @ _psd_sqrt(sigma))))


def _hermitian_root(h, beta):
    energies, vectors = scipy.linalg.eigh(h)
    exponents = -beta * (energies - energies[0])
    roots = np.exp(0.5 * exponents) / math.sqrt(np.sum(np.exp(exponents)))
    return (vectors * roots) @ vectors.conj().T


def hermitian_total_fidelity(p1, p2, beta):
    """Π_k der Uhlmann-Fidelity, unabhängig vom biorthogonalen Pfad (nur ξ = 0).

    ρ_k^{1/2} kommt direkt aus den Energien von h_k, F_k als Nuklearnorm
    von ρ₁^{1/2}ρ₂^{1/2}.
    """
    if p1.xi != 0.0 or p2.xi != 0.0:
        raise InvalidParameters("Die hermitesche Referenz setzt ξ = 0 voraus")
    total = 0.0
    for k in momentum_grid(p1.N, 1).paired:
        root1 = _hermitian_root(-p1.J * sector_matrix(k, p1.eta, 0.0), beta)
        root2 = _hermitian_root(-p2.J * sector_matrix(k, p2.eta, 0.0), beta)
        total += math.log(float(np.sum(scipy.linalg.svdvals(root1 @ root2))))
    return math.exp(total)
