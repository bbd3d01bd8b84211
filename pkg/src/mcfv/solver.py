"""Semi-discrete finite-volume right-hand side and explicit time stepping.

Face fluxes are computed once per face along each axis (the face between
``K`` and ``K + e_d`` is stored at ``K``) and gathered per cell, so every
output cell has exactly one writer and the result does not depend on any
evaluation order.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field as dc_field
from typing import Callable, Sequence

import numpy as np

from .mesh import Field, Grid, neighbor
from .thermo import GasMixture, InadmissibleStateError, _bcast, check_admissible

log = logging.getLogger(__name__)

INTEGRATORS = ("euler", "ssprk3")
VISCOSITY_MODES = ("local", "global")


@dataclass
class SolverConfig:
    cfl: float = 0.5
    t_end: float = 1.0
    integrator: str = "ssprk3"
    viscosity_mode: str = "local"
    source: Callable | None = None
    snapshot_times: Sequence[float] = ()
    # evaluate the cell entropy inequality on every right-hand side
    check_entropy: bool = False

    def __post_init__(self):
        if not 0.0 < self.cfl <= 1.0:
            raise ValueError(f"cfl must lie in (0, 1], got {self.cfl}")
        if not self.t_end > 0.0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if self.integrator not in INTEGRATORS:
            raise ValueError(f"unknown integrator {self.integrator!r}")
        if self.viscosity_mode not in VISCOSITY_MODES:
            raise ValueError(f"unknown viscosity mode {self.viscosity_mode!r}")


@dataclass
class CellState:
    """Per-cell thermodynamic quantities shared by flux and diagnostics."""

    U: np.ndarray
    rho: np.ndarray
    u: np.ndarray
    p: np.ndarray
    T: np.ndarray
    speed: np.ndarray


def cell_state(U: np.ndarray, mix: GasMixture) -> CellState:
    T = check_admissible(U, mix)
    n = mix.n
    rho_i = U[:n]
    rho = rho_i.sum(axis=0)
    u = U[n:-1] / rho
    p = np.sum(_bcast(mix.r, rho_i) * rho_i, axis=0) * T
    if np.any(~(p > 0.0)):
        raise InadmissibleStateError("pressure is non-positive", reason="p <= 0")
    cp = np.sum(_bcast(mix.c_p, rho_i) * rho_i, axis=0)
    cv = np.sum(_bcast(mix.c_v, rho_i) * rho_i, axis=0)
    c = np.sqrt(cp / cv * p / rho)
    speed = np.sqrt(np.sum(u * u, axis=0)) + c
    return CellState(U, rho, u, p, T, speed)


def axis_flux(cs: CellState, d: int, mix: GasMixture) -> np.ndarray:
    """Physical flux along ``e_d`` from precomputed cell quantities."""
    n = mix.n
    ud = cs.u[d]
    f = cs.U * ud
    f[n + d] += cs.p
    f[-1] += cs.p * ud
    return f


@dataclass
class FaceData:
    """Lax-Friedrichs data on the ``+e_d`` face of every cell."""

    d: int
    flux: np.ndarray
    lam: np.ndarray
    jump: np.ndarray
    f_K: np.ndarray
    f_L: np.ndarray


def face_fluxes(cs: CellState, grid: Grid, mix: GasMixture, mode: str = "local") -> list[FaceData]:
    faces = []
    lam_global = float(cs.speed.max()) if mode == "global" else None
    for d in range(grid.dim):
        f_K = axis_flux(cs, d, mix)
        f_L = neighbor(f_K, d)
        jump = neighbor(cs.U, d) - cs.U
        if lam_global is None:
            lam = np.maximum(cs.speed, neighbor(cs.speed[None], d)[0])
        else:
            lam = np.full(grid.cells, lam_global)
        F = 0.5 * (f_K + f_L) - 0.5 * lam * jump
        faces.append(FaceData(d, F, lam, jump, f_K, f_L))
    return faces


def flux_divergence(faces: list[FaceData], grid: Grid) -> np.ndarray:
    """``-(1/|K|) sum_L |S_KL| F_KL`` per cell."""
    out = None
    for fd in faces:
        # outgoing flux on the +e_d face, incoming on the -e_d face
        term = (fd.flux - neighbor(fd.flux, fd.d, -1)) / grid.h[fd.d]
        out = -term if out is None else out - term
    return out


def _source_values(cfg: SolverConfig, grid: Grid, t: float):
    if cfg.source is None:
        return None
    return np.asarray(cfg.source(t, grid.centers()), dtype=float)


def rhs(field: Field, mix: GasMixture, cfg: SolverConfig, t: float = 0.0) -> Field:
    """Time derivative of every cell average, source included."""
    cs = cell_state(field.data, mix)
    dudt = flux_divergence(face_fluxes(cs, field.grid, mix, cfg.viscosity_mode), field.grid)
    q = _source_values(cfg, field.grid, t)
    if q is not None:
        dudt = dudt + q
    return Field(field.grid, dudt)


def stable_dt(field: Field, mix: GasMixture, cfg: SolverConfig) -> float:
    """``cfl / sum_d (lambda / h_d)`` with the global wave speed ``lambda``."""
    from .flux import global_lambda

    lam = global_lambda(field, mix)
    if not lam > 0.0:
        raise ValueError("global wave speed is zero; no stable time step exists")
    return cfg.cfl / sum(lam / h for h in field.grid.h)


@dataclass
class StageMonitor:
    """Tracks the worst cell entropy inequality over all evaluated stages."""

    worst_ratio: float = -np.inf
    worst_time: float = float("nan")
    evaluations: int = 0

    def update(self, ratio: float, t: float):
        self.evaluations += 1
        if ratio > self.worst_ratio:
            self.worst_ratio, self.worst_time = ratio, t


class _Evaluator:
    def __init__(self, grid: Grid, mix: GasMixture, cfg: SolverConfig,
                 monitor: StageMonitor | None):
        self.grid, self.mix, self.cfg, self.monitor = grid, mix, cfg, monitor
        self._x = grid.centers() if cfg.source is not None else None

    def __call__(self, U: np.ndarray, t: float) -> np.ndarray:
        cs = cell_state(U, self.mix)
        faces = face_fluxes(cs, self.grid, self.mix, self.cfg.viscosity_mode)
        dudt = flux_divergence(faces, self.grid)
        if self.cfg.check_entropy and self.monitor is not None:
            from .diagnostics import entropy_residual_from_faces

            res, scale = entropy_residual_from_faces(cs, faces, dudt, self.grid, self.mix)
            self.monitor.update(float(np.max(res / scale)), t)
        if self.cfg.source is not None:
            dudt = dudt + self.cfg.source(t, self._x)
        return dudt


def _stage(evaluate, U, t, stage):
    try:
        return evaluate(U, t)
    except InadmissibleStateError as err:
        err.stage = stage
        err.args = (f"{err.args[0]} (stage {stage}, t={t!r})",)
        raise


def _advance(evaluate, U: np.ndarray, dt: float, t: float, integrator: str) -> np.ndarray:
    if integrator == "euler":
        return U + dt * _stage(evaluate, U, t, 1)
    U1 = U + dt * _stage(evaluate, U, t, 1)
    U2 = 0.75 * U + 0.25 * (U1 + dt * _stage(evaluate, U1, t + dt, 2))
    return U / 3.0 + 2.0 / 3.0 * (U2 + dt * _stage(evaluate, U2, t + 0.5 * dt, 3))


def step(field: Field, dt: float, mix: GasMixture, cfg: SolverConfig, t: float = 0.0,
         monitor: StageMonitor | None = None) -> Field:
    """One forward-Euler or SSPRK3 step; admissibility is checked, never enforced."""
    evaluate = _Evaluator(field.grid, mix, cfg, monitor)
    U = _advance(evaluate, field.data, dt, t, cfg.integrator)
    try:
        check_admissible(U, mix)
    except InadmissibleStateError as err:
        err.stage = "final"
        err.args = (f"{err.args[0]} (after step at t={t!r})",)
        raise
    return Field(field.grid, U)


@dataclass
class RunResult:
    final: Field
    time: float
    snapshots: list[tuple[float, Field]]
    diagnostics: object
    monitor: StageMonitor
    steps: int = 0
    dts: list[float] = dc_field(default_factory=list)


def run(initial: Field, mix: GasMixture, cfg: SolverConfig,
        observers: Sequence[Callable[[float, Field], None]] = (),
        diagnostics: bool = True) -> RunResult:
    """Advance ``initial`` to ``cfg.t_end``.

    Steps are clipped to land exactly on snapshot times and on ``t_end``.
    Each observer is called as ``observer(t, field)`` at ``t = 0`` and after
    every step.
    """
    from .diagnostics import DiagnosticsTimeSeries

    grid = initial.grid
    check_admissible(initial.data, mix)
    monitor = StageMonitor()
    evaluate = _Evaluator(grid, mix, cfg, monitor)
    series = DiagnosticsTimeSeries.start(initial, mix, cfg.viscosity_mode) if diagnostics else None

    targets = sorted({float(s) for s in cfg.snapshot_times if 0.0 < s < cfg.t_end} | {float(cfg.t_end)})
    snapshots = []
    if any(float(s) == 0.0 for s in cfg.snapshot_times):
        snapshots.append((0.0, initial.copy()))
    for obs in observers:
        obs(0.0, initial)

    U = initial.data.copy()
    t = 0.0
    dts = []
    for target in targets:
        while t < target:
            dt = stable_dt(Field(grid, U), mix, cfg)
            landing = t + dt >= target * (1.0 - 1e-14) - 1e-300
            if landing:
                dt = target - t
            try:
                U = _advance(evaluate, U, dt, t, cfg.integrator)
                check_admissible(U, mix)
            except InadmissibleStateError as err:
                err.time = t
                if "t=" not in err.args[0]:
                    err.args = (f"{err.args[0]} (step from t={t!r})",)
                raise
            t = target if landing else t + dt
            dts.append(dt)
            current = Field(grid, U)
            if series is not None:
                series.record(t, dt, current)
            for obs in observers:
                obs(t, current)
        snapshots.append((t, Field(grid, U.copy())))
    if float(cfg.t_end) not in {float(s) for s in cfg.snapshot_times}:
        snapshots.pop()
    log.debug("run finished: %d steps, t=%g", len(dts), t)
    return RunResult(Field(grid, U), t, snapshots, series, monitor, len(dts), dts)
