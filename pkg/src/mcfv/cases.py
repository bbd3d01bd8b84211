"""Initial data, exact solutions and sources for the two test problems."""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from .flux import physical_flux
from .mesh import Field, Grid, project
from .thermo import GasMixture, InadmissibleStateError, is_admissible, primitive_to_conserved

MASK64 = (1 << 64) - 1


class XorShift64Star:
    """xorshift64* generator seeded through splitmix64.

    Constants: shifts (12, 25, 27), multiplier 0x2545F4914F6CDD1D; the seed is
    passed once through splitmix64 (increment 0x9E3779B97F4A7C15, multipliers
    0xBF58476D1CE4E5B9 and 0x94D049BB133111EB) so that seed 0 is usable.
    Doubles take the top 53 bits.
    """

    def __init__(self, seed: int):
        z = (int(seed) + 0x9E3779B97F4A7C15) & MASK64
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        self.state = (z ^ (z >> 31)) or 0x9E3779B97F4A7C15

    def next_u64(self) -> int:
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & MASK64
        x ^= x >> 27
        self.state = x
        return (x * 0x2545F4914F6CDD1D) & MASK64

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        return lo + (hi - lo) * (self.next_u64() >> 11) * 2.0 ** -53


# -- manufactured smooth solution ----------------------------------------------------

ENERGY_PROFILES = ("rho2", "rho")


@dataclass
class ManufacturedSolution:
    """Travelling density wave with unit velocity in every direction.

    ``energy_profile="rho2"`` sets ``E = rho**2``; ``"rho"`` sets ``E = rho``,
    which has zero internal energy at ``u = (1, 1)`` and is rejected.
    """

    mix: GasMixture
    dim: int = 2
    c: float = 2.0
    A: float = 0.1
    energy_profile: str = "rho2"
    fractions: tuple[float, ...] = (1.0 / 3.0, 2.0 / 3.0)
    box: tuple[float, float] = (-1.0, 1.0)
    verify: bool = True

    def __post_init__(self):
        if self.energy_profile not in ENERGY_PROFILES:
            raise ValueError(f"unknown energy profile {self.energy_profile!r}")
        if len(self.fractions) != self.mix.n:
            raise ValueError("one mass fraction per species is required")
        if abs(sum(self.fractions) - 1.0) > 1e-14:
            raise ValueError("mass fractions must sum to one")
        if self.mix.n != 2 or any(abs(s.gamma - 1.4) > 1e-14 or abs(s.r - 0.4) > 1e-14
                                  for s in self.mix.species):
            warnings.warn("manufactured problem is set up for two species with gamma=1.4, r=0.4",
                          stacklevel=2)
        w = np.array(self.fractions)
        self._w = w
        self._kappa = float(w @ self.mix.r) / float(w @ self.mix.c_v)
        self._a = 0.5 * self.dim + float(w @ self.mix.e0)
        probe = Grid.uniform(64, self.dim, *self.box)
        if not is_admissible(self.exact(0.0, probe.centers()), self.mix):
            raise InadmissibleStateError(
                f"energy profile {self.energy_profile!r} gives a non-positive temperature",
                reason="T <= 0")
        if self.verify:
            self.check_source()

    @property
    def grid_box(self):
        return (self.box,) * self.dim

    def grid(self, n: int) -> Grid:
        return Grid.uniform(n, self.dim, *self.box)

    def density(self, t, x):
        return self.c + self.A * np.sin(np.pi * (np.sum(x, axis=0) - t))

    def _energy_per_mass(self, rho):
        if self.energy_profile == "rho2":
            return rho, np.ones_like(rho)
        return np.ones_like(rho), np.zeros_like(rho)

    def exact(self, t, x) -> np.ndarray:
        """Conserved state at ``(t, x)``; ``x`` has shape ``(dim, ...)``."""
        rho = self.density(t, x)
        e, _ = self._energy_per_mass(rho)
        rho_i = self._w.reshape((-1,) + (1,) * rho.ndim) * rho
        m = np.broadcast_to(rho, (self.dim,) + rho.shape)
        return np.concatenate([rho_i, m, (rho * e)[None]], axis=0)

    def pressure(self, t, x):
        rho = self.density(t, x)
        e, _ = self._energy_per_mass(rho)
        return self._kappa * rho * (e - self._a)

    def source(self, t, x) -> np.ndarray:
        """Closed-form ``dU/dt + div f(U)`` of the exact solution."""
        N = self.dim
        rho = self.density(t, x)
        D = np.pi * self.A * np.cos(np.pi * (np.sum(x, axis=0) - t))
        e, de = self._energy_per_mass(rho)
        dp = self._kappa * (e - self._a + rho * de)
        dE = e + rho * de
        q_rho = (N - 1) * D
        q_i = self._w.reshape((-1,) + (1,) * rho.ndim) * q_rho
        q_m = np.broadcast_to((N - 1 + dp) * D, (N,) + rho.shape)
        q_E = ((N - 1) * dE + N * dp) * D
        return np.concatenate([q_i, q_m, q_E[None]], axis=0)

    def source_fd(self, t: float, x: np.ndarray, step: float = 1e-5) -> np.ndarray:
        """Central-difference evaluation of ``dU/dt + div f(U)`` at one point."""
        x = np.asarray(x, dtype=float)
        dUdt = (self.exact(t + step, x) - self.exact(t - step, x)) / (2 * step)
        div = np.zeros_like(dUdt)
        for d in range(self.dim):
            e = np.zeros(self.dim)
            e[d] = step
            n = np.zeros(self.dim)
            n[d] = 1.0
            div += (physical_flux(self.exact(t, x + e), n, self.mix)
                    - physical_flux(self.exact(t, x - e), n, self.mix)) / (2 * step)
        return dUdt + div

    def check_source(self, samples: int = 100, seed: int = 12345, rtol: float = 1e-6):
        rng = XorShift64Star(seed)
        lo, hi = self.box
        worst = 0.0
        for _ in range(samples):
            t = rng.uniform(0.0, 1.0)
            x = np.array([rng.uniform(lo, hi) for _ in range(self.dim)])
            q = self.source(t, x)
            q_fd = self.source_fd(t, x)
            scale = max(1.0, float(np.max(np.abs(q))))
            worst = max(worst, float(np.max(np.abs(q - q_fd))) / scale)
        if worst > rtol:
            raise RuntimeError(f"manufactured source disagrees with finite differences "
                               f"(relative error {worst:.3e})")
        return worst

    def describe(self) -> dict:
        return {"c": self.c, "A": self.A, "energy_profile": self.energy_profile,
                "fractions": list(self.fractions), "dim": self.dim, "box": list(self.box)}


def manufactured_initial(ms: ManufacturedSolution, grid: Grid, projected: bool = False) -> Field:
    """Exact solution at ``t = 0`` sampled at cell centres (or cell-averaged)."""
    if projected:
        return project(lambda x: ms.exact(0.0, x), grid)
    return Field(grid, ms.exact(0.0, grid.centers()))


def manufactured_source(ms: ManufacturedSolution):
    return ms.source


def exact_error(field: Field, ms: ManufacturedSolution, t: float,
                normalized: bool = False) -> np.ndarray:
    """Discrete L2 error per conserved variable against cell-centre exact values.

    ``normalized=True`` divides by the square root of the domain volume
    (a root-mean-square error).
    """
    diff = field.data - ms.exact(t, field.grid.centers())
    axes = tuple(range(1, diff.ndim))
    err = np.sqrt(field.grid.cell_volume * np.sum(diff * diff, axis=axes))
    if normalized:
        err = err / np.sqrt(field.grid.cell_volume * field.grid.ncells)
    return err


# -- Kelvin-Helmholtz layers -------------------------------------------------------------

KHI_LAYERS = ((0.8, 0.2, -0.5), (0.2, 1.8, 0.5), (1.8, 0.2, -0.5), (0.2, 0.8, 0.5))


@dataclass
class KHIConfig:
    """Layered shear flow with three randomly perturbed interfaces.

    Coefficients are drawn per interface ``j``: ten raw ``a`` values from
    U(0, 1), then ten ``b`` values from U(0, 2 pi); ``a`` is then normalised to
    unit sum.
    """

    seed: int = 0
    epsilon: float = 0.01
    positions: tuple[float, float, float] = (0.25, 0.50, 0.75)
    modes: int = 10
    pressure: float = 2.5
    layers: tuple = KHI_LAYERS
    a: np.ndarray = dc_field(default=None, repr=False)
    b: np.ndarray = dc_field(default=None, repr=False)
    a_raw: np.ndarray = dc_field(default=None, repr=False)

    def __post_init__(self):
        if self.a is None or self.b is None:
            rng = XorShift64Star(self.seed)
            J = len(self.positions)
            a_raw = np.empty((J, self.modes))
            b = np.empty((J, self.modes))
            for j in range(J):
                a_raw[j] = [rng.uniform() for _ in range(self.modes)]
                b[j] = [rng.uniform(0.0, 2.0 * math.pi) for _ in range(self.modes)]
            self.a_raw = a_raw
            self.a = a_raw / a_raw.sum(axis=1, keepdims=True)
            self.b = b
        self.a = np.asarray(self.a, dtype=float)
        self.b = np.asarray(self.b, dtype=float)

    def interface(self, j: int, x1) -> np.ndarray:
        """Height of interface ``j`` (0-based) at ``x1``."""
        x1 = np.asarray(x1, dtype=float)
        i = np.arange(1, self.modes + 1).reshape((-1,) + (1,) * x1.ndim)
        modes = self.a[j].reshape(i.shape) * np.cos(self.b[j].reshape(i.shape) + 2 * np.pi * i * x1)
        return self.positions[j] + self.epsilon * modes.sum(axis=0)

    def layer_index(self, x) -> np.ndarray:
        x1, x2 = x[0], x[1]
        idx = np.zeros(np.shape(x1), dtype=int)
        for j in range(len(self.positions)):
            idx += (x2 > self.interface(j, x1)).astype(int)
        return idx

    def primitive(self, x):
        table = np.array(self.layers)
        layer = self.layer_index(x)
        rho_i = np.stack([table[layer, 0], table[layer, 1]])
        u = np.stack([table[layer, 2], np.zeros(layer.shape)])
        return rho_i, u, np.full(layer.shape, self.pressure)

    def coeffs_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["j", "i", "a", "b"])
        for j in range(self.a.shape[0]):
            for i in range(self.modes):
                w.writerow([j + 1, i + 1, repr(float(self.a[j, i])), repr(float(self.b[j, i]))])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_coeffs_csv(cls, text: str, **kwargs) -> "KHIConfig":
        rows = list(csv.DictReader(io.StringIO(text)))
        J = max(int(r["j"]) for r in rows)
        M = max(int(r["i"]) for r in rows)
        a = np.zeros((J, M))
        b = np.zeros((J, M))
        for r in rows:
            a[int(r["j"]) - 1, int(r["i"]) - 1] = float(r["a"])
            b[int(r["j"]) - 1, int(r["i"]) - 1] = float(r["b"])
        return cls(a=a, b=b, modes=M, **kwargs)

    def describe(self) -> dict:
        return {"seed": self.seed, "epsilon": self.epsilon, "positions": list(self.positions),
                "pressure": self.pressure, "a": self.a.tolist(), "b": self.b.tolist()}


def khi_mixture() -> GasMixture:
    return GasMixture.from_gamma_r([1.4, 1.4], [1.0, 1.0])


def manufactured_mixture() -> GasMixture:
    return GasMixture.from_gamma_r([1.4, 1.4], [0.4, 0.4])


def khi_initial(cfg: KHIConfig, grid: Grid, mix: GasMixture, projected: bool = False) -> Field:
    if grid.dim != 2:
        raise ValueError("the Kelvin-Helmholtz setup needs a 2D grid")
    if mix.n != 2:
        raise ValueError("the Kelvin-Helmholtz setup needs two species")

    def state(x):
        rho_i, u, p = cfg.primitive(x)
        return primitive_to_conserved(rho_i, u, p, mix)

    if projected:
        return project(state, grid)
    return Field(grid, state(grid.centers()))
