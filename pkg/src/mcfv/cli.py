"""Command-line entry point.

Subcommands::

    mcfv run <config> [-o DIR]          single run: snap_*.snap, diagnostics.csv,
                                        metadata.json (and khi_coeffs.csv for KHI)
    mcfv eoc <config> [-o DIR]          report_eoc.csv, relative_entropy.csv
    mcfv cesaro <config> [-o DIR]       report_cesaro.csv, levels.csv
    mcfv consistency <config> [-o DIR]  consistency.csv
    mcfv diagnose <run-dir>             summary of a finished run directory

CSV columns
-----------
``diagnostics.csv``
    ``t, dt, mass_1..mass_n, energy, eta_total, min_rho_1..min_rho_n, min_p,
    min_T, min_s, bv_l1, bv_l2, renormalized`` followed by the norm monitors
    ``rho_Lgamma, m_Lk, p_L1, E_L1, rho1_L1..``.  ``bv_l1``/``bv_l2`` are the
    weak-BV integrands with ``|U_L - U_K|`` and ``|U_L - U_K|^2``.
``report_eoc.csv``
    ``N`` then ``<var>_err, <var>_eoc`` per conserved variable; a final
    ``mean`` row holds the mean EOC.
``relative_entropy.csv``
    ``N, H, order`` with ``H`` the field relative entropy at ``t_end``.
``report_cesaro.csv``
    ``variable, n, E1, eoc1, E2, eoc2``.
``levels.csv``
    one row per mesh: steps, conservation drift, positivity minima, entropy
    monitors and the time-integrated weak-BV functionals.
``consistency.csv``
    ``N, h`` then the time-integrated residual per component (``rho1..``,
    ``m``, ``eta``); the final ``order`` row holds the mean decay order.

Exit status is 0 on success, 2 on configuration errors and 3 when a state
leaves the admissible set.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, load_config
from .mesh import read_snapshot
from .thermo import InadmissibleStateError

EXIT_OK, EXIT_CONFIG, EXIT_ADMISSIBILITY = 0, 2, 3


def _outdir(args, default: str) -> Path:
    out = Path(args.output or default)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_meta(out: Path, meta: dict):
    (out / "metadata.json").write_text(json.dumps(meta, indent=2, default=str))


def cmd_run(args) -> int:
    from .studies import run_single

    spec = load_config(args.config)
    out = run_single(spec, _outdir(args, f"run_{spec.config_hash}"))
    print(out)
    return EXIT_OK


def cmd_eoc(args) -> int:
    from .studies import run_eoc

    spec = load_config(args.config)
    out = _outdir(args, "eoc")
    report, rel = run_eoc(spec, workers=args.workers)
    print(report.to_csv(out / "report_eoc.csv"), end="")
    rel.to_csv(out / "relative_entropy.csv")
    _write_meta(out, report.metadata)
    return EXIT_OK


def cmd_cesaro(args) -> int:
    from .studies import levels_report, run_cesaro

    spec = load_config(args.config)
    out = _outdir(args, "cesaro")
    report, levels = run_cesaro(spec, workers=args.workers)
    print(report.to_csv(out / "report_cesaro.csv"), end="")
    levels_report(levels).to_csv(out / "levels.csv")
    _write_meta(out, report.metadata)
    return EXIT_OK


def cmd_consistency(args) -> int:
    from .studies import run_consistency

    spec = load_config(args.config)
    out = _outdir(args, "consistency")
    report = run_consistency(spec, workers=args.workers)
    print(report.to_csv(out / "consistency.csv"), end="")
    _write_meta(out, report.metadata)
    return EXIT_OK


def diagnose(run_dir) -> dict:
    """Summarize a run directory written by ``mcfv run``."""
    run_dir = Path(run_dir)
    meta_path = run_dir / "metadata.json"
    diag_path = run_dir / "diagnostics.csv"
    if not meta_path.exists() or not diag_path.exists():
        raise ConfigError(f"{run_dir} is not a run directory (metadata.json/diagnostics.csv missing)")
    meta = json.loads(meta_path.read_text())
    data = np.genfromtxt(diag_path, delimiter=",", names=True)
    data = np.atleast_1d(data)
    cols = data.dtype.names
    mass_cols = [c for c in cols if c.startswith("mass_")] + ["energy"]
    drift = max(float(abs(data[c][-1] - data[c][0]) / abs(data[c][0])) for c in mass_cols)
    summary = {
        "config_hash": meta.get("config_hash"),
        "case": meta.get("case"),
        "steps": int(len(data) - 1),
        "t_final": float(data["t"][-1]),
        "conservation_drift": drift,
        "min_rho": float(min(data[c].min() for c in cols if c.startswith("min_rho_"))),
        "min_p": float(data["min_p"].min()),
        "min_T": float(data["min_T"].min()),
        "min_s_drop": float(data["min_s"][0] - data["min_s"].min()),
        "renormalized_max": float(data["renormalized"].max()),
        "bv_l1_integral": float(np.trapezoid(data["bv_l1"], data["t"])),
        "snapshots": sorted(p.name for p in run_dir.glob("*.snap")),
    }
    for name in summary["snapshots"][-1:]:
        _, t, names = read_snapshot(run_dir / name)[:3]
        summary["last_snapshot_time"] = t
    return summary


def cmd_diagnose(args) -> int:
    summary = diagnose(args.run_dir)
    width = max(len(k) for k in summary)
    for k, v in summary.items():
        print(f"{k:<{width}}  {v}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mcfv", description="Multicomponent Euler finite-volume runs and studies")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn, help_ in (("run", cmd_run, "single run"),
                            ("eoc", cmd_eoc, "manufactured-solution convergence study"),
                            ("cesaro", cmd_cesaro, "KHI Cesaro study"),
                            ("consistency", cmd_consistency, "consistency-residual study")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("config")
        sp.add_argument("-o", "--output", help="output directory")
        if name != "run":
            sp.add_argument("-j", "--workers", type=int, default=None)
        sp.set_defaults(func=fn)
    sp = sub.add_parser("diagnose", help="summarize a run directory")
    sp.add_argument("run_dir")
    sp.set_defaults(func=cmd_diagnose)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.verbose:
        import logging
        logging.basicConfig(level=logging.DEBUG)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except InadmissibleStateError as err:
        print(f"inadmissible state: {err}", file=sys.stderr)
        return EXIT_ADMISSIBILITY


if __name__ == "__main__":
    sys.exit(main())
