"""Refinement studies: EOC tables, Cesaro averages, consistency decay."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Sequence

import numpy as np

from .cases import (KHIConfig, ManufacturedSolution, exact_error, khi_initial,
                    manufactured_initial)
from .config import ConfigError, RunSpec
from .diagnostics import TEST_FUNCTIONS, ConsistencyMonitor, relative_entropy_total
from .mesh import Field, Grid, prolong, write_snapshot
from .solver import RunResult, SolverConfig, run
from .thermo import GasMixture, primitive_to_conserved


def variable_names(mix: GasMixture, dim: int) -> list[str]:
    return ([f"rho{i + 1}" for i in range(mix.n)]
            + [f"m{d + 1}" for d in range(dim)] + ["E"])


def eoc(errors: Sequence[float], cells: Sequence[int]) -> list[float | None]:
    """``log(e_{k-1}/e_k) / log(N_k/N_{k-1})``; ``None`` for the first row."""
    out = [None]
    for k in range(1, len(errors)):
        if errors[k] <= 0.0 or errors[k - 1] <= 0.0:
            out.append(float("nan"))
        else:
            out.append(math.log(errors[k - 1] / errors[k]) / math.log(cells[k] / cells[k - 1]))
    return out


@dataclass
class StudyReport:
    kind: str
    columns: list[str]
    rows: list[dict]
    metadata: dict = dc_field(default_factory=dict)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=self.columns, lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow({k: _fmt(r.get(k)) for k in self.columns})
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    def column(self, name: str, where=None) -> list:
        return [r[name] for r in self.rows if where is None or where(r)]


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return v


# -- building runs from a spec ------------------------------------------------------

def _case_objects(spec: RunSpec):
    p = spec.case_params
    if spec.case == "khi":
        return KHIConfig(seed=int(p.get("seed", 0)), epsilon=float(p.get("epsilon", 0.01)),
                         pressure=float(p.get("pressure", 2.5)))
    if spec.case == "manufactured":
        return ManufacturedSolution(spec.mixture, dim=spec.dim, c=float(p.get("c", 2.0)),
                                    A=float(p.get("a", 0.1)),
                                    energy_profile=p.get("energy_profile", "rho2").strip())
    return None


def build_problem(spec: RunSpec, cells: int | None = None):
    """``(grid, initial field, source or None, case object)`` for one mesh."""
    n = spec.cells if cells is None else cells
    case = _case_objects(spec)
    mix = spec.mixture
    if spec.case == "khi":
        grid = Grid.uniform(n, 2, 0.0, 1.0)
        return grid, khi_initial(case, grid, mix, spec.projected_init), None, case
    if spec.case == "manufactured":
        grid = case.grid(n)
        return grid, manufactured_initial(case, grid, spec.projected_init), case.source, case
    p = spec.case_params
    try:
        rho = [float(v) for v in p["rho"].replace(",", " ").split()]
        u = [float(v) for v in p.get("u", "0").replace(",", " ").split()]
        pres = float(p["p"])
    except KeyError as err:
        raise ConfigError(f"[uniform] missing key {err}") from None
    box = [float(v) for v in p.get("box", "0 1").replace(",", " ").split()]
    if len(rho) != mix.n or len(u) != spec.dim:
        raise ConfigError("[uniform] rho needs one entry per species and u one per dimension")
    grid = Grid.uniform(n, spec.dim, box[0], box[1])
    U = primitive_to_conserved(np.array(rho), np.array(u), pres, mix)
    data = np.broadcast_to(U.reshape((-1,) + (1,) * spec.dim), (U.size,) + grid.cells).copy()
    return grid, Field(grid, data), None, None


def solver_config(spec: RunSpec, source=None, snapshot_times=None, t_end=None) -> SolverConfig:
    return SolverConfig(cfl=spec.cfl, t_end=spec.t_end if t_end is None else t_end,
                        integrator=spec.integrator, viscosity_mode=spec.viscosity,
                        source=source,
                        snapshot_times=spec.snapshot_times if snapshot_times is None else snapshot_times,
                        check_entropy=spec.check_entropy)


def run_summary(result: RunResult, mix: GasMixture) -> dict:
    d = result.diagnostics
    totals = [d.column(f"mass_{i + 1}") for i in range(mix.n)] + [d.column("energy")]
    drift = max(float(abs(c[-1] - c[0]) / abs(c[0])) for c in totals)
    min_rho = min(float(d.column(f"min_rho_{i + 1}").min()) for i in range(mix.n))
    return {
        "steps": result.steps,
        "conservation_drift": drift,
        "min_rho": min_rho,
        "min_p": float(d.column("min_p").min()),
        "min_T": float(d.column("min_T").min()),
        "min_s_drop": float(d.Z_star - d.column("min_s").min()),
        "renormalized_max": float(d.column("renormalized").max()),
        "max_entropy_ratio": float(result.monitor.worst_ratio),
        "entropy_evaluations": result.monitor.evaluations,
        "bv_l1_integral": d.time_integral("bv_l1"),
        "bv_l2_integral": d.time_integral("bv_l2"),
        "eta_total_increase": float(np.max(np.diff(d.column("eta_total")), initial=0.0)),
        **{f"max_{k}": float(d.column(k).max())
           for k in d.columns if k.endswith(("_Lgamma", "_Lk", "_L1"))},
    }


def metadata(spec: RunSpec, case=None, **extra) -> dict:
    meta = {"config_hash": spec.config_hash, "case": spec.case,
            "mixture": spec.mixture.as_dict(), "cfl": spec.cfl, "t_end": spec.t_end,
            "integrator": spec.integrator, "viscosity": spec.viscosity}
    if case is not None and hasattr(case, "describe"):
        meta["case_params"] = case.describe()
    if spec.case == "manufactured":
        meta["note"] = "relative entropy totals omit the energy defect term (none exists at fixed h)"
    meta.update(extra)
    return meta


# -- single run ----------------------------------------------------------------------

def run_single(spec: RunSpec, outdir) -> Path:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    grid, initial, source, case = build_problem(spec)
    cfg = solver_config(spec, source)
    names = variable_names(spec.mixture, grid.dim)
    t0 = time.perf_counter()
    result = run(initial, spec.mixture, cfg)
    wall = time.perf_counter() - t0
    for k, (t, snap) in enumerate(result.snapshots):
        write_snapshot(outdir / f"snap_{k:04d}.snap", snap, t, names)
    result.diagnostics.to_csv(outdir / "diagnostics.csv")
    if isinstance(case, KHIConfig):
        case.coeffs_csv(outdir / "khi_coeffs.csv")
    meta = metadata(spec, case, cells=list(grid.cells), seed=getattr(case, "seed", None),
                    wall_time=wall, summary=run_summary(result, spec.mixture))
    (outdir / "metadata.json").write_text(json.dumps(meta, indent=2))
    (outdir / "config.ini").write_text(spec.text)
    return outdir


# -- EOC study -----------------------------------------------------------------------

def _eoc_level(spec: RunSpec, n: int, t_end: float):
    grid, initial, source, case = build_problem(spec, n)
    result = run(initial, spec.mixture, solver_config(spec, source, [], t_end))
    err = exact_error(result.final, case, t_end)
    H = relative_entropy_total(result.final, lambda x: case.exact(t_end, x), spec.mixture)
    return err, H, run_summary(result, spec.mixture)


def _map(fn, args, workers: int):
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, *zip(*args)))
    return [fn(*a) for a in args]


def run_eoc(spec: RunSpec, meshes: Sequence[int] | None = None, t_end: float | None = None,
            workers: int | None = None):
    """Manufactured-solution errors and EOC; returns ``(eoc report, relative-entropy report)``."""
    if spec.case != "manufactured":
        raise ConfigError("eoc studies need case = manufactured")
    meshes = list(meshes or _ints_opt(spec.study.get("meshes"), [16, 32, 64, 128]))
    t_end = spec.t_end if t_end is None else t_end
    workers = workers or int(spec.study.get("workers", 1))
    t0 = time.perf_counter()
    results = _map(_eoc_level, [(spec, n, t_end) for n in meshes], workers)
    wall = time.perf_counter() - t0
    names = variable_names(spec.mixture, spec.dim)
    errs = np.array([r[0] for r in results])
    columns = ["N"] + [f"{v}_{k}" for v in names for k in ("err", "eoc")]
    rows = [{"N": n} for n in meshes]
    for j, v in enumerate(names):
        orders = eoc(errs[:, j].tolist(), meshes)
        for row, e, o in zip(rows, errs[:, j], orders):
            row[f"{v}_err"] = float(e)
            row[f"{v}_eoc"] = o
    if len(meshes) > 1:
        mean = {"N": "mean"}
        for v in names:
            mean[f"{v}_eoc"] = float(np.mean([r[f"{v}_eoc"] for r in rows[1:]]))
        rows.append(mean)
    case = _case_objects(spec)
    meta = metadata(spec, case, meshes=meshes, t_end=t_end, wall_time=wall,
                    summaries=[r[2] for r in results])
    report = StudyReport("eoc", columns, rows, meta)
    H = [r[1] for r in results]
    re_rows = [{"N": n, "H": h, "order": o} for n, h, o in zip(meshes, H, eoc(H, meshes))]
    re_report = StudyReport("relative_entropy", ["N", "H", "order"], re_rows, meta)
    return report, re_report


def _ints_opt(text, default):
    if text is None:
        return default
    return [int(v) for v in str(text).replace(",", " ").split()]


# -- Cesaro study ---------------------------------------------------------------------

def _cesaro_level(spec: RunSpec, n: int, times: list[float]):
    grid, initial, source, case = build_problem(spec, n)
    result = run(initial, spec.mixture, solver_config(spec, source, times))
    snaps = [snap.data for _, snap in result.snapshots]
    return grid, snaps, run_summary(result, spec.mixture), spec.mixture.as_dict()


def _space_time_l1(diffs_per_time: np.ndarray, times: Sequence[float]) -> np.ndarray:
    """Trapezoid in time of per-variable spatial L1 norms, ``(ntimes, nvar)``."""
    return np.trapezoid(diffs_per_time, np.asarray(times), axis=0)


def run_cesaro(spec: RunSpec, meshes: Sequence[int] | None = None, ntimes: int | None = None,
               workers: int | None = None, keep_levels: bool = False):
    """E1 and E2 errors of a mesh hierarchy against its finest level.

    Returns ``(report, levels)`` where ``levels`` maps each mesh to its run
    summary (weak-BV integral, positivity, entropy monitors).
    """
    if spec.case != "khi":
        raise ConfigError("cesaro studies need case = khi")
    meshes = list(meshes or _ints_opt(spec.study.get("meshes"), [32, 64, 128, 256]))
    ref = int(spec.study.get("reference", meshes[-1]))
    if ref != meshes[-1] or sorted(meshes) != meshes:
        raise ConfigError("meshes must be increasing and end with the reference mesh")
    if any(ref % n for n in meshes):
        raise ConfigError("cesaro hierarchy must be nested (each mesh divides the reference)")
    ntimes = ntimes or int(spec.study.get("times", 21))
    workers = workers or int(spec.study.get("workers", 1))
    times = [float(t) for t in np.linspace(0.0, spec.t_end, ntimes)]
    t0 = time.perf_counter()
    results = _map(_cesaro_level, [(spec, n, times) for n in meshes], workers)
    wall = time.perf_counter() - t0
    if any(r[3] != results[0][3] for r in results):
        raise ConfigError("refusing to aggregate runs with different mixture parameters")

    fine = results[-1][0]
    vol = fine.cell_volume
    L = len(meshes)
    nvar = results[0][1][0].shape[0]
    E1 = np.zeros((len(times), L, nvar))
    E2 = np.zeros((len(times), L, nvar))
    axes = tuple(range(1, fine.dim + 1))
    for k in range(len(times)):
        levels = [prolong(Field(r[0], r[1][k]), fine).data for r in results]
        cumulative = np.cumsum(levels, axis=0) / np.arange(1, L + 1).reshape((-1,) + (1,) * (fine.dim + 1))
        for lvl in range(L):
            E1[k, lvl] = vol * np.sum(np.abs(levels[lvl] - levels[-1]), axis=axes)
            E2[k, lvl] = vol * np.sum(np.abs(cumulative[lvl] - cumulative[-1]), axis=axes)
    e1 = _space_time_l1(E1, times)
    e2 = _space_time_l1(E2, times)

    names = variable_names(spec.mixture, 2)
    rows = []
    for j, v in enumerate(names):
        o1 = eoc(e1[:-1, j].tolist(), meshes[:-1])
        o2 = eoc(e2[:-1, j].tolist(), meshes[:-1])
        for lvl, n in enumerate(meshes[:-1]):
            rows.append({"variable": v, "n": n, "E1": float(e1[lvl, j]), "eoc1": o1[lvl],
                         "E2": float(e2[lvl, j]), "eoc2": o2[lvl]})
    case = _case_objects(spec)
    summaries = {n: r[2] for n, r in zip(meshes, results)}
    meta = metadata(spec, case, meshes=meshes, reference=ref, times=times, levels=summaries,
                    seed=case.seed, wall_time=wall)
    report = StudyReport("cesaro", ["variable", "n", "E1", "eoc1", "E2", "eoc2"], rows, meta)
    if keep_levels:
        return report, summaries, results
    return report, summaries


def levels_report(summaries: dict) -> StudyReport:
    keys = list(next(iter(summaries.values())))
    rows = [{"n": n, **s} for n, s in summaries.items()]
    return StudyReport("levels", ["n"] + keys, rows)


# -- consistency study ------------------------------------------------------------------

def _consistency_level(spec: RunSpec, n: int, test_name: str):
    grid, initial, source, case = build_problem(spec, n)
    monitor = ConsistencyMonitor(grid, spec.mixture, TEST_FUNCTIONS[test_name],
                                 spec.viscosity, source)
    result = run(initial, spec.mixture, solver_config(spec, source, []), observers=[monitor],
                 diagnostics=False)
    return max(grid.h), monitor.report(), float(result.monitor.worst_ratio)


def run_consistency(spec: RunSpec, meshes: Sequence[int] | None = None,
                    test_name: str | None = None, workers: int | None = None) -> StudyReport:
    meshes = list(meshes or _ints_opt(spec.study.get("meshes"), [16, 32, 64, 128]))
    test_name = test_name or spec.study.get("test_function", "cos2pi").strip()
    if test_name not in TEST_FUNCTIONS:
        raise ConfigError(f"[study] test_function = {test_name!r}: "
                          f"expected one of {sorted(TEST_FUNCTIONS)}")
    workers = workers or int(spec.study.get("workers", 1))
    t0 = time.perf_counter()
    results = _map(_consistency_level, [(spec, n, test_name) for n in meshes], workers)
    wall = time.perf_counter() - t0
    comps = list(results[0][1])
    rows = [{"N": n, "h": h, **vals} for n, (h, vals, _) in zip(meshes, results)]
    if len(meshes) > 1:
        order = {"N": "order", "h": None}
        for c in comps:
            vals = [r[c] for r in rows]
            order[c] = float(np.mean([o for o in eoc(vals, meshes)[1:]]))
        rows.append(order)
    meta = metadata(spec, _case_objects(spec), meshes=meshes, test_function=test_name,
                    wall_time=wall, max_entropy_ratio=[r[2] for r in results])
    return StudyReport("consistency", ["N", "h"] + comps, rows, meta)
