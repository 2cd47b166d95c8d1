# src/config.py
"""Einstellungen aus settings.ini und flache Laufdateien (key = value)."""
import configparser
import logging
import math
import os
import sys
from dataclasses import dataclass, fields, replace

from .errors import ConfigError, InvalidParameters
from .fidelity import Displacement, SweepConfig

logger = logging.getLogger(__name__)

THREADS_ENV = "PT_ISING_THREADS"
RUN_SECTION = "run"
COMMANDS = ("validate", "sweep2d", "scan", "temp-scan", "fit")


def get_base_path():
    """Projektverzeichnis, auch innerhalb eines PyInstaller-Bundles."""
    if getattr(sys, 'frozen', False):
        return sys._MEIPASS
    return os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))


def load_settings(path=None):
    """Lädt settings.ini; fehlt die Datei, gelten die Fallback-Werte.

    Returns:
        configparser.ConfigParser
    """
    settings = configparser.ConfigParser()
    path = path or os.path.join(get_base_path(), 'settings.ini')
    if not os.path.exists(path):
        logger.info("Keine settings.ini unter %s, verwende Standardwerte", path)
        return settings
    try:
        settings.read(path, encoding='utf-8')
        logger.info("Einstellungen geladen von: %s", path)
    except configparser.Error as e:
        raise ConfigError(f"settings.ini unter {path} ist fehlerhaft: {e}") from e
    return settings


def resolve_threads(settings, flag=None):
    """Anzahl der Prozesse: settings.ini < PT_ISING_THREADS < --threads."""
    threads = settings.getint('Parallel', 'threads', fallback=1)
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            threads = int(env)
        except ValueError as e:
            raise ConfigError(f"{THREADS_ENV} muss eine ganze Zahl sein, erhalten: {env!r}", key=THREADS_ENV) from e
    if flag is not None:
        threads = flag
    if threads < 1:
        raise ConfigError(f"Anzahl der Prozesse muss >= 1 sein, erhalten: {threads}", key="threads")
    return threads


def _float_list(text):
    return tuple(float(part) for part in text.replace(';', ',').split(',') if part.strip())


def _optional_float(text):
    return None if text.strip().lower() in ('', 'none') else float(text)


def _optional_str(text):
    return None if text.strip().lower() in ('', 'none') else text.strip()


def _bool(text):
    value = text.strip().lower()
    if value in ('1', 'true', 'yes', 'ja', 'on'):
        return True
    if value in ('0', 'false', 'no', 'nein', 'off'):
        return False
    raise ValueError(f"kein Wahrheitswert: {text!r}")


@dataclass(frozen=True)
class RunConfig:
    """Alle Parameter eines Laufs, aus Laufdatei und --set-Überschreibungen."""
    command: str = "sweep2d"
    eta_min: float = -1.5
    eta_max: float = 1.5
    eta_step: float = 0.05
    xi_min: float = -1.5
    xi_max: float = 1.5
    xi_step: float = 0.05
    xi: float = 0.0
    phi: float = 0.0
    phis: tuple = ()
    dr: float = 0.01
    betas: tuple = (1.0,)
    N: int = 300
    J: float = 1.0
    displacement: str = "cartesian"
    d_eta: float = 0.01
    d_xi: float = 0.01
    method: str = "auto"
    tolerance: float = None
    output_dir: str = "results"
    output: str = None
    input: str = None
    threads: int = None
    seed: int = 0
    report_format: str = "csv"
    plot_script: bool = True

    def displacement_spec(self):
        if self.displacement == "radial":
            return Displacement("radial", dr=self.dr)
        if self.displacement == "cartesian":
            return Displacement("cartesian", d_eta=self.d_eta, d_xi=self.d_xi)
        raise ConfigError(f"displacement muss cartesian oder radial sein, erhalten: {self.displacement!r}",
                          key="displacement")

    def sweep_config(self):
        """SweepConfig für sweep2d bzw. für den η-Scan bei festem ξ (scan)."""
        if self.command == "scan":
            xi_min, xi_max, xi_step = self.xi, self.xi, 1.0
        else:
            xi_min, xi_max, xi_step = self.xi_min, self.xi_max, self.xi_step
        return SweepConfig(
            eta_min=self.eta_min, eta_max=self.eta_max, eta_step=self.eta_step,
            xi_min=xi_min, xi_max=xi_max, xi_step=xi_step,
            betas=self.betas, N=self.N, displacement=self.displacement_spec(),
            J=self.J, method=self.method, output=self.output,
        )

    @property
    def angles(self):
        return self.phis if self.phis else (self.phi,)


_CONVERTERS = {
    "command": str, "displacement": str, "method": str, "output_dir": str, "report_format": str,
    "eta_min": float, "eta_max": float, "eta_step": float,
    "xi_min": float, "xi_max": float, "xi_step": float, "xi": float, "phi": float, "dr": float,
    "J": float, "d_eta": float, "d_xi": float,
    "phis": _float_list, "betas": _float_list,
    "N": int, "seed": int, "threads": int,
    "tolerance": _optional_float, "output": _optional_str, "input": _optional_str,
    "plot_script": _bool,
}
KNOWN_KEYS = tuple(f.name for f in fields(RunConfig))


def parse_run_file(path):
    """Liest eine flache Laufdatei ohne Abschnittsüberschrift.

    Raises:
        OSError: Datei fehlt oder ist unlesbar.
        ConfigError: Syntaxfehler oder unbekannter Schlüssel.
    """
    with open(path, 'r', encoding='utf-8') as fh:
        text = fh.read()
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=('#', ';'))
    parser.optionxform = str
    try:
        parser.read_string(f"[{RUN_SECTION}]\n{text}", source=path)
    except configparser.Error as e:
        raise ConfigError(f"Laufdatei {path} ist fehlerhaft: {e}") from e
    values = dict(parser.items(RUN_SECTION))
    for key in values:
        _check_key(key)
    return values


def parse_override(text):
    """'key=value' aus --set in (key, value)."""
    if '=' not in text:
        raise ConfigError(f"--set erwartet key=value, erhalten: {text!r}")
    key, value = (part.strip() for part in text.split('=', 1))
    _check_key(key)
    return key, value


def _check_key(key):
    if key not in KNOWN_KEYS:
        raise ConfigError(f"Unbekannter Schlüssel in der Konfiguration: {key}", key=key)


def build_run_config(command, values=None, overrides=(), settings=None):
    """Setzt RunConfig aus Standardwerten, settings.ini, Laufdatei und Überschreibungen zusammen."""
    cfg = RunConfig(command=command)
    if settings is not None:
        cfg = replace(
            cfg,
            method=settings.get('Numerik', 'method', fallback=cfg.method),
            tolerance=settings.getfloat('Toleranzen', 'validate_tolerance', fallback=cfg.tolerance),
            report_format=settings.get('Report', 'format', fallback=cfg.report_format),
            plot_script=settings.getboolean('Report', 'plot_scripts', fallback=cfg.plot_script),
        )
    merged = dict(values or {})
    merged.update(dict(overrides))
    merged.pop("command", None)
    converted = {}
    for key, raw in merged.items():
        _check_key(key)
        try:
            converted[key] = _CONVERTERS[key](raw)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Ungültiger Wert für {key}: {raw!r} ({e})", key=key) from e
    cfg = replace(cfg, **converted)
    _validate(cfg)
    return cfg


def _validate(cfg):
    if cfg.command not in COMMANDS:
        raise ConfigError(f"Unbekannter Befehl: {cfg.command}", key="command")
    if cfg.report_format not in ("csv", "xlsx"):
        raise ConfigError(f"report_format muss csv oder xlsx sein, erhalten: {cfg.report_format!r}",
                          key="report_format")
    if cfg.method not in ("auto", "analytic", "numeric"):
        raise ConfigError(f"method muss auto, analytic oder numeric sein, erhalten: {cfg.method!r}", key="method")
    if cfg.N < 2 or cfg.N % 2:
        raise ConfigError(f"N muss gerade und >= 2 sein, erhalten: {cfg.N}", key="N")
    for beta in cfg.betas:
        if not (math.isfinite(beta) and beta >= 0.0):
            raise ConfigError(f"β muss endlich und >= 0 sein, erhalten: {beta}", key="betas")
    try:
        cfg.displacement_spec()
    except InvalidParameters as e:
        raise ConfigError(str(e), key="displacement") from e
