# src/errors.py
"""Fehlerklassen des Pakets.

Alle fachlichen Fehler erben von PtIsingError, damit die CLI sie gesammelt
abfangen und auf Exit-Codes abbilden kann.
"""


class PtIsingError(Exception):
    """Basisklasse aller fachlichen Fehler."""


class InvalidParameters(PtIsingError, ValueError):
    """Ungültige Modell- oder Laufparameter."""


class OddN(InvalidParameters):
    """N ist ungerade, die Impulse lassen sich nicht zu ±k-Paaren ordnen."""


class SingularDenominator(PtIsingError):
    """Ein Nenner der geschlossenen Eigenzustandsformeln verschwindet."""


class SingularGram(PtIsingError):
    """Die Gram-Matrix eines Eigenwert-Clusters ist (fast) singulär."""


class NoConvergence(PtIsingError):
    """Die QR-Iteration hat das Iterationslimit überschritten."""


class DefectiveMatrix(PtIsingError):
    """Die Matrix ist nicht (numerisch) diagonalisierbar."""


class SizeCap(PtIsingError):
    """Die dichte Referenzrechnung würde die Größenbeschränkung überschreiten."""


class SectorError(PtIsingError):
    """Fehler in einem einzelnen Impulssektor, mit dem betroffenen k."""

    def __init__(self, k, cause):
        self.k = k
        self.cause = cause
        super().__init__(f"Sektor k={k:.12g}: {type(cause).__name__}: {cause}")


class InsufficientData(PtIsingError):
    """Zu wenige Datenpunkte für den Fit."""


class DegenerateWindow(PtIsingError):
    """Kein Datenpunkt liegt oberhalb der Fit-Schwelle."""


class RankDeficient(PtIsingError):
    """Die Designmatrix des harmonischen Fits hat nicht vollen Rang."""


class FlatScan(PtIsingError):
    """Der Scan zeigt keinen Einbruch (max − min unter der Schwelle)."""


class ConfigError(PtIsingError):
    """Fehlerhafte Konfiguration, mit dem betroffenen Schlüssel."""

    def __init__(self, message, key=None):
        self.key = key
        super().__init__(message)


class InputFileError(PtIsingError):
    """Eingabedatei fehlt, ist unlesbar oder hat nicht die erwarteten Spalten."""

    def __init__(self, message, column=None):
        self.column = column
        super().__init__(message)


class BranchCutWarning(UserWarning):
    """Eigenwerte liegen auf dem Verzweigungsschnitt von sqrt/log."""
