# src/model.py
"""Modellparameter, Polardarstellung, Dispersionsrelationen und Phasengeometrie.

Die Kette hat 2N Plätze mit dem Hamiltonoperator
    H = −J Σ_j (σ^z_j σ^z_{j+1} + g_j σ^x_j),  g_j = η + i(−1)^j ξ.
Alle Energien sind in Einheiten von J angegeben.
"""
import cmath
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidParameters, OddN

# Schwelle für "reell" bei den Quasiteilchenenergien
IS_REAL_TOL = 1e-10

# Vorzeichen der 16 Niveaus relativ zu ε¹, ε³, ε⁹, ε¹¹ (0 = Nullmode)
_LEVEL_SOURCE = (
    (0, 1), (0, -1), (1, 1), (1, -1),
    (None, 0), (None, 0), (None, 0), (None, 0),
    (2, 1), (2, -1), (3, 1), (3, -1),
    (2, 1), (2, -1), (3, 1), (3, -1),
)


@dataclass(frozen=True)
class PolarField:
    r: float
    phi: float


@dataclass(frozen=True)
class CouplingParams:
    """Eingangsgrößen des Modells.

    Args:
        eta (float): Reelles Transversalfeld η (in Einheiten von J).
        xi (float): Imaginäres alternierendes Feld ξ.
        N (int): Anzahl der Impulspaare, die Kette hat 2N Plätze.
        J (float): Energieskala, muss positiv sein.
    """
    eta: float
    xi: float
    N: int = 4
    J: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.eta) and math.isfinite(self.xi)):
            raise InvalidParameters(f"Felder müssen endlich sein (eta={self.eta}, xi={self.xi})")
        if not (math.isfinite(self.J) and self.J > 0):
            raise InvalidParameters(f"J muss positiv sein, erhalten: {self.J}")
        if int(self.N) != self.N or self.N < 2:
            raise InvalidParameters(f"N muss eine ganze Zahl >= 2 sein, erhalten: {self.N}")
        if self.N % 2:
            raise OddN(f"N muss gerade sein, erhalten: {self.N}")

    @classmethod
    def from_polar(cls, r, phi, N=4, J=1.0):
        return cls(eta=r * math.cos(phi), xi=r * math.sin(phi), N=N, J=J)

    @property
    def polar(self):
        return polar_from_cartesian(self.eta, self.xi)

    def mirrored(self):
        """Gibt die Parameter mit ξ → −ξ zurück."""
        return replace(self, xi=-self.xi)

    def with_field(self, eta, xi):
        return replace(self, eta=eta, xi=xi)


@dataclass(frozen=True)
class DispersionValue:
    n: int
    k: float
    value: complex
    is_real: bool


@dataclass(frozen=True)
class PhaseLabel:
    label: str
    distance: float


@dataclass(frozen=True)
class MomentumGrid:
    """Impulse eines Paritätssektors.

    paired enthält die k aus (0, π), die jeweils das Paar ±k vertreten;
    unpaired die Punkte k = 0 und k = π, die keinen Partner haben.
    """
    sector: int
    paired: tuple
    unpaired: tuple = ()


def polar_from_cartesian(eta, xi):
    """Wandelt (η, ξ) in (r, φ) mit φ ∈ [0, 2π) um. Für η = ξ = 0 gilt φ = 0."""
    r = math.hypot(eta, xi)
    if r == 0.0:
        return PolarField(0.0, 0.0)
    phi = math.atan2(xi, eta)
    if phi < 0.0:
        phi += 2.0 * math.pi
    if phi >= 2.0 * math.pi:
        phi = 0.0
    return PolarField(r, phi)


def _as_polar(p):
    if isinstance(p, PolarField):
        return p
    if isinstance(p, CouplingParams):
        return p.polar
    raise InvalidParameters(f"PolarField oder CouplingParams erwartet, erhalten: {type(p).__name__}")


def _check_momentum(k):
    if not (0.0 < k < math.pi):
        raise InvalidParameters(f"k muss in (0, π) liegen, erhalten: {k}")


def _base_energies(k, p):
    """Die vier unabhängigen Werte ε¹, ε³, ε⁹, ε¹¹ (Hauptzweig der Wurzeln)."""
    r2 = p.r * p.r
    cos2 = math.cos(2.0 * p.phi)
    sin2 = math.sin(2.0 * p.phi)
    cos_k = math.cos(k)

    outer = math.sqrt(max(r2 * r2 - 2.0 * r2 * cos_k + 1.0, 0.0))
    e1 = cmath.sqrt(complex(2.0 * r2 * cos2 + 2.0 + 2.0 * outer))
    e3 = cmath.sqrt(complex(2.0 * r2 * cos2 + 2.0 - 2.0 * outer))

    # tr M² und det M der ungeraden Bogoliubov-Matrix legen diesen Radikanden fest
    inner = cmath.sqrt(complex(2.0 * r2 * (cos2 + cos_k) - r2 * r2 * sin2 * sin2))
    base = r2 * cos2 + 1.0
    e9 = cmath.sqrt(base + inner)
    e11 = cmath.sqrt(base - inner)
    return e1, e3, e9, e11


def dispersion_table(k, p):
    """Alle 16 Werte ε^n(k), n = 1..16, als komplexes Array (Index n−1).

    Keine Bereichsprüfung für k, damit auch k → −k ausgewertet werden kann.
    """
    base = _base_energies(k, _as_polar(p))
    table = np.zeros(16, dtype=np.complex128)
    for idx, (source, sign) in enumerate(_LEVEL_SOURCE):
        if source is not None:
            table[idx] = sign * base[source]
    return table


def dispersion(n, k, p, tol=IS_REAL_TOL):
    """Geschlossene Form von ε^n(k).

    Args:
        n (int): Niveau in [1, 16].
        k (float): Impuls in (0, π).
        p (PolarField | CouplingParams): Feldparameter.
        tol (float): Schwelle für is_real.

    Returns:
        DispersionValue: Wert mit Flag is_real (|Im ε| < tol).
    """
    if not (1 <= n <= 16):
        raise InvalidParameters(f"Niveau n muss in [1, 16] liegen, erhalten: {n}")
    _check_momentum(k)
    value = complex(dispersion_table(k, p)[n - 1])
    return DispersionValue(n=n, k=k, value=value, is_real=abs(value.imag) < tol)


def momentum_grid(N, sector=1):
    """Impulsgitter eines Paritätssektors.

    σ = +1: k = (2m+1)π/N, m = 0..N/2−1 (Standardgitter).
    σ = −1: k = 2mπ/N; k = 0 und k = π werden getrennt als ungepaart geführt.
    """
    if int(N) != N or N < 2:
        raise InvalidParameters(f"N muss eine ganze Zahl >= 2 sein, erhalten: {N}")
    if N % 2:
        raise OddN(f"N muss gerade sein, erhalten: {N}")
    if sector not in (1, -1):
        raise InvalidParameters(f"Sektor muss +1 oder -1 sein, erhalten: {sector}")

    if sector == 1:
        return MomentumGrid(sector=1, paired=tuple((2 * m + 1) * math.pi / N for m in range(N // 2)))

    paired = tuple(2 * m * math.pi / N for m in range(1, N // 2))
    return MomentumGrid(sector=-1, paired=paired, unpaired=(0.0, math.pi))


def classify_phase(eta, xi, tol=1e-9):
    """Ordnet (η, ξ) einer Phase zu.

    Konvention: II ist der Ferromagnet im Einheitskreis (r < 1); außerhalb
    trennt der Strahl η = 0 die Paramagneten I (η > 0) und III (η < 0).
    distance ist der Abstand zur nächsten kritischen Menge.
    """
    r = math.hypot(eta, xi)
    to_circle = abs(r - 1.0)
    if abs(xi) >= 1.0:
        to_ray = abs(eta)
    else:
        to_ray = math.hypot(eta, abs(xi) - 1.0)
    distance = min(to_circle, to_ray)

    if to_circle < tol or (abs(eta) < tol and r > 1.0):
        return PhaseLabel("boundary", 0.0)
    if r < 1.0:
        return PhaseLabel("II", distance)
    return PhaseLabel("I" if eta > 0 else "III", distance)
