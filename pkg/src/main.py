# src/main.py
"""Kommandozeile: validate, sweep2d, scan, temp-scan und fit.

Exit-Codes: 0 ok, 1 Prüfung oder Auswertung fehlgeschlagen, 2 Konfiguration
bzw. ungültige Parameter, 3 Ein-/Ausgabefehler.
"""
import argparse
import logging
import math
import sys
import time

from . import analysis, config, fidelity, reporting, validation
from .errors import (ConfigError, FlatScan, InputFileError, InsufficientData, InvalidParameters, PtIsingError,
                     RankDeficient)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_IO = 3


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="DATEI", help="Laufdatei mit key = value Zeilen")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="Überschreibt einen Schlüssel der Laufdatei (mehrfach möglich)")
    common.add_argument("--threads", type=int, default=None, help="Anzahl der Worker-Prozesse")
    common.add_argument("--output-dir", default=None, help="Zielordner der Ergebnisse")
    common.add_argument("--settings", default=None, help="Pfad zu settings.ini")
    common.add_argument("-v", "--verbose", action="store_true", help="Ausführliche Protokollierung")

    parser = argparse.ArgumentParser(
        prog="pt-ising-fidelity",
        description="Mischzustands-Fidelity der PT-symmetrischen Ising-Kette mit transversalem Feld",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", parents=[common], help="Prüfsuite gegen dichte Referenzen")
    p_validate.add_argument("--tolerance", type=float, default=None, help="Globale Toleranz für alle Prüfungen")
    p_validate.add_argument("--seed", type=int, default=None, help="Startwert der Zufallspunkte")
    p_validate.add_argument("--check", action="append", default=None, help="Nur diese Prüfung(en) ausführen")

    sub.add_parser("sweep2d", parents=[common], help="Fidelity auf dem (η, ξ)-Gitter")
    sub.add_parser("scan", parents=[common], help="η-Scan bei festem ξ mit Minimumsuche")
    sub.add_parser("temp-scan", parents=[common], help="F(β) auf dem kritischen Kreis")

    p_fit = sub.add_parser("fit", parents=[common], help="Exponential- und harmonische Fits einer temp-scan-CSV")
    p_fit.add_argument("input", nargs="?", default=None, help="CSV mit den Spalten beta, log_F (optional phi)")
    return parser


def _setup_logging(verbose):
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def load_run_config(args):
    """RunConfig aus settings.ini, Laufdatei, --set und den Befehlsoptionen."""
    settings = config.load_settings(args.settings)
    values = config.parse_run_file(args.config) if args.config else {}
    overrides = [config.parse_override(item) for item in args.overrides]
    if args.output_dir:
        overrides.append(("output_dir", args.output_dir))
    if getattr(args, "tolerance", None) is not None:
        overrides.append(("tolerance", repr(args.tolerance)))
    if getattr(args, "seed", None) is not None:
        overrides.append(("seed", str(args.seed)))
    if getattr(args, "input", None):
        overrides.append(("input", args.input))
    cfg = config.build_run_config(args.command, values, overrides, settings=settings)
    threads = config.resolve_threads(settings, args.threads if args.threads is not None else cfg.threads)
    return cfg, threads


def cmd_validate(cfg, names=None):
    print("Starte Prüfsuite ...")
    results = validation.run_checks(tolerance=cfg.tolerance, seed=cfg.seed, names=names)
    failed = [r for r in results if not r.passed]
    for r in results:
        status = "ok    " if r.passed else "FEHLER"
        print(f"  {status} {r.name:<22} Residuum {r.residual:.3e}  Toleranz {r.tolerance:.1e}  "
              f"({r.seconds:.2f} s) {r.detail}")
    if failed:
        for r in failed:
            print(f"FEHLER: Prüfung fehlgeschlagen: {r.name} (Residuum {r.residual:.3e} > {r.tolerance:.1e})")
        return EXIT_FAILED
    print(f"Alle {len(results)} Prüfungen bestanden.")
    return EXIT_OK


def _emit_table(cfg, table, stem, plot_kind):
    path = reporting.output_path(cfg.output_dir, stem, "csv", cfg.output)
    written = reporting.write_table(table, path, report_format=cfg.report_format)
    for item in written:
        print(f"Tabelle erstellt: {item}")
    if cfg.plot_script:
        print(f"Plot-Skript erstellt: {reporting.write_plot_script(plot_kind, path)}")
    return path


def cmd_sweep2d(cfg, threads=1):
    sweep = cfg.sweep_config()
    print(f"sweep2d: {len(sweep.etas)} x {len(sweep.xis)} Knoten, β = {list(sweep.betas)}, N = {sweep.N}, "
          f"{threads} Prozess(e)")
    start = time.time()
    table = fidelity.sweep2d(sweep, workers=threads)
    failures = int((table["error"] != "").sum())
    print(f"Fertig nach {time.time() - start:.1f} s, {failures} fehlgeschlagene Zeilen.")
    _emit_table(cfg, table, "sweep2d", "sweep2d")
    return EXIT_OK


def cmd_scan(cfg, threads=1):
    sweep = cfg.sweep_config()
    print(f"scan: ξ = {cfg.xi}, {len(sweep.etas)} η-Werte, β = {list(sweep.betas)}, N = {sweep.N}")
    table = fidelity.sweep2d(sweep, workers=threads)
    path = _emit_table(cfg, table, "scan", "scan")

    expected = math.sqrt(1.0 - cfg.xi ** 2) if abs(cfg.xi) < 1.0 else None
    minima = []
    for beta, group in table.groupby("beta", sort=True):
        group = group[group["error"] == ""]
        entry = {"beta": float(beta), "eta_star": None, "note": ""}
        try:
            entry["eta_star"] = analysis.locate_minima(group["eta"].to_numpy(), group["log_F"].to_numpy())
            print(f"  β = {beta:g}: η* = {entry['eta_star']:.5f}")
        except (FlatScan, InsufficientData, InvalidParameters) as e:
            entry["note"] = str(e)
            print(f"  β = {beta:g}: kein Minimum ({e})")
        minima.append(entry)
    sidecar = {"xi": cfg.xi, "eta_expected": expected, "N": cfg.N, "minima": minima}
    print(f"JSON erstellt: {reporting.write_json(sidecar, path[:-4] + '_minima.json')}")
    return EXIT_OK


def cmd_temp_scan(cfg, threads=1):
    print(f"temp-scan: φ = {list(cfg.angles)}, Δr = {cfg.dr}, β = {list(cfg.betas)}, N = {cfg.N}")
    table = fidelity.temp_scan(cfg.angles, cfg.dr, cfg.betas, cfg.N, J=cfg.J, method=cfg.method, workers=threads)
    _emit_table(cfg, table, "temp_scan", "temp-scan")
    return EXIT_OK


def _fit_dict(fit):
    return {"gamma": fit.gamma, "lnA": fit.lnA, "A": fit.A, "r_squared": fit.r_squared,
            "window": list(fit.window), "n_points": fit.n_points}


def _harmonic_dict(fit):
    return {"a0": fit.a0, "a2": fit.a2, "a4": fit.a4, "relative_residual": fit.relative_residual,
            "order": list(fit.order)}


def cmd_fit(cfg):
    if not cfg.input:
        raise ConfigError("fit braucht eine Eingabe-CSV (Argument oder Schlüssel input)", key="input")
    table = reporting.read_table(cfg.input, required=("beta", "log_F"))
    if "error" in table.columns:
        table = table[table["error"].isna() | (table["error"] == "")]
    fits = analysis.fit_temp_scan(table)
    result = {"input": cfg.input, "fits": []}
    for phi, fit in fits.items():
        entry = {"phi": phi}
        entry.update(_fit_dict(fit))
        result["fits"].append(entry)
        label = "" if phi is None else f"φ = {phi:.4g}: "
        print(f"  {label}Γ = {fit.gamma:.6g}, ln A = {fit.lnA:.6g}, R² = {fit.r_squared:.6f}")

    angles = [phi for phi in fits if phi is not None]
    if len(angles) >= 3:
        try:
            gamma_fit, ln_a_fit = analysis.fit_harmonic_table(fits)
            result["gamma_harmonic"] = _harmonic_dict(gamma_fit)
            result["lnA_harmonic"] = _harmonic_dict(ln_a_fit)
            print(f"  Γ(φ) = {gamma_fit.a0:.6g} + {gamma_fit.a2:.6g} cos 2φ "
                  f"(rel. Residuum {gamma_fit.relative_residual:.3g})")
        except RankDeficient as e:
            result["harmonic_note"] = str(e)
            print(f"  Kein harmonischer Fit: {e}")

    path = reporting.output_path(cfg.output_dir, "fit", "json", cfg.output)
    print(f"JSON erstellt: {reporting.write_json(result, path)}")
    return EXIT_OK


def run_from_args(args):
    cfg, threads = load_run_config(args)
    if cfg.command == "validate":
        return cmd_validate(cfg, names=getattr(args, "check", None))
    if cfg.command == "sweep2d":
        return cmd_sweep2d(cfg, threads)
    if cfg.command == "scan":
        return cmd_scan(cfg, threads)
    if cfg.command == "temp-scan":
        return cmd_temp_scan(cfg, threads)
    return cmd_fit(cfg)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup_logging(args.verbose)
    try:
        return run_from_args(args)
    except ConfigError as e:
        print(f"FEHLER: Konfiguration: {e}")
        return EXIT_CONFIG
    except InvalidParameters as e:
        print(f"FEHLER: Ungültige Parameter: {e}")
        return EXIT_CONFIG
    except InputFileError as e:
        print(f"FEHLER: {e}")
        return EXIT_IO
    except OSError as e:
        print(f"FEHLER: Datei: {e}")
        return EXIT_IO
    except PtIsingError as e:
        print(f"FEHLER: {type(e).__name__}: {e}")
        return EXIT_FAILED


if __name__ == "__main__":
    # 1. Befehl ausführen (Konfiguration wird im Befehl geladen)
    exit_code = main()

    # 2. Ergebnis an die Shell melden
    if exit_code != EXIT_OK:
        print(f"Beendet mit Code {exit_code}.")
    sys.exit(exit_code)
