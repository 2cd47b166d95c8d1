# src/reporting.py
"""Ausgabe von Tabellen (CSV, optional xlsx), JSON-Ergebnissen und Plot-Skripten."""
import json
import logging
import os
from datetime import datetime

import pandas as pd

from .errors import InputFileError

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def output_path(output_dir, stem, extension, output=None):
    """Zielpfad; ohne expliziten Namen mit Zeitstempel wie <stem>_YYYYmmdd_HHMMSS.<ext>."""
    os.makedirs(output_dir, exist_ok=True)
    if output:
        return output if os.path.isabs(output) else os.path.join(output_dir, output)
    timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    return os.path.join(output_dir, f"{stem}_{timestamp}.{extension}")


def write_table(table, path, report_format="csv", float_format=FLOAT_FORMAT, sheet_name="Ergebnisse"):
    """Schreibt die Tabelle als CSV und bei report_format 'xlsx' zusätzlich als Excel-Datei.

    Args:
        table (pandas.DataFrame): Ergebnistabelle mit fester Spaltenreihenfolge.
        path (str): Pfad der CSV-Datei.
        report_format (str): 'csv' oder 'xlsx'.
        float_format (str): Zahlenformat der CSV (Standard: 17 signifikante Stellen).

    Returns:
        list[str]: Alle geschriebenen Pfade.
    """
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    table.to_csv(path, index=False, float_format=float_format)
    written = [path]
    if report_format == "xlsx":
        xlsx_path = os.path.splitext(path)[0] + ".xlsx"
        with pd.ExcelWriter(xlsx_path, engine="openpyxl") as writer:
            table.to_excel(writer, sheet_name=sheet_name, index=False)
        written.append(xlsx_path)
    for item in written:
        logger.info("Tabelle geschrieben: %s", item)
    return written


def read_table(path, required=()):
    """Liest eine CSV und prüft die benötigten Spalten.

    Raises:
        InputFileError: Datei unlesbar oder Spalte fehlt (mit Spaltenname).
    """
    try:
        table = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise InputFileError(f"Eingabedatei {path} nicht lesbar: {e}") from e
    for column in required:
        if column not in table.columns:
            raise InputFileError(f"Spalte {column} fehlt in {path}", column=column)
    return table


def write_json(data, path):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, ensure_ascii=False, allow_nan=True)
        fh.write("\n")
    logger.info("JSON geschrieben: %s", path)
    return path


_PLOT_HEADER = '''"""Erzeugt aus __CSV_NAME__ eine Abbildung (benötigt matplotlib)."""
import sys

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

table = pd.read_csv(__CSV__)
'''

_PLOT_BODIES = {
    "sweep2d": '''
for beta, group in table.groupby("beta"):
    grid = group.pivot(index="xi", columns="eta", values="F")
    fig = plt.figure()
    ax = fig.add_subplot(projection="3d")
    eta, xi = np.meshgrid(grid.columns.to_numpy(), grid.index.to_numpy())
    ax.plot_surface(eta, xi, grid.to_numpy(), cmap="viridis")
    ax.set_xlabel("eta")
    ax.set_ylabel("xi")
    ax.set_zlabel("F")
    ax.set_title(f"beta = {beta:g}")
    fig.savefig(__STEM__ + f"_beta{beta:g}.png", dpi=150)
''',
    "scan": '''
fig, ax = plt.subplots()
for beta, group in table.groupby("beta"):
    ax.plot(group["eta"], group["F"], label=f"beta = {beta:g}")
ax.set_xlabel("eta")
ax.set_ylabel("F")
ax.legend()
fig.savefig(__STEM__ + ".png", dpi=150)
''',
    "temp-scan": '''
fig, ax = plt.subplots()
for phi, group in table.groupby("phi"):
    ax.plot(group["beta"], group["log_F"], marker="o", label=f"phi = {phi:.4g}")
ax.set_xlabel("beta")
ax.set_ylabel("ln F")
ax.legend()
fig.savefig(__STEM__ + ".png", dpi=150)
''',
}

_PLOT_FOOTER = '''
if "--show" in sys.argv:
    plt.show()
'''


def write_plot_script(kind, csv_path, path=None):
    """Legt ein eigenständiges matplotlib-Skript neben der CSV ab; es wird nicht ausgeführt."""
    if kind not in _PLOT_BODIES:
        raise ValueError(f"Unbekannter Plot-Typ: {kind}")
    stem = os.path.splitext(csv_path)[0]
    path = path or stem + "_plot.py"
    source = _PLOT_HEADER.replace("__CSV_NAME__", os.path.basename(csv_path)).replace("__CSV__", repr(csv_path))
    source += _PLOT_BODIES[kind].replace("__STEM__", repr(stem)) + _PLOT_FOOTER
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(source)
    logger.info("Plot-Skript geschrieben: %s", path)
    return path
