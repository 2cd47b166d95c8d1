"""
PT-Ising Fidelity - exakte Lösung der nicht-hermiteschen PT-symmetrischen Ising-Kette

Dieses Package enthält das Modell (Dispersion, Phasen), den Impulssektor-Löser
mit biorthogonalen Eigenbasen, die Matrixfunktionen, die Mischzustands-Fidelity
samt Parameter-Scans, die dichten Referenzrechnungen und die Auswertung.
"""

__version__ = "1.0.0"
__author__ = "PT-Ising Fidelity Team"

# Hauptmodule exportieren
from . import errors
from . import model
from . import matfun
from . import sector
from . import fidelity
from . import oracle
from . import analysis
from . import validation
from . import config
from . import reporting

__all__ = [
    "errors",
    "model",
    "matfun",
    "sector",
    "fidelity",
    "oracle",
    "analysis",
    "validation",
    "config",
    "reporting",
]
