"""Ideal-gas mixture thermodynamics.

Conserved states are numpy arrays with the component axis first::

    U = (rho_1, ..., rho_n, m_1, ..., m_N, E)

Every function accepts a single state of shape ``(n + N + 1,)`` or a stack of
states of shape ``(n + N + 1, ...)``; trailing axes are carried through.

Sign convention: ``s`` is the specific mixture entropy and ``eta = -rho * s``
is the convex mathematical entropy.  The entropy flux is ``eta * u``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class InadmissibleStateError(ValueError):
    """A state with a non-positive partial density or temperature.

    ``cell`` is the multi-index of the first offending entry (``None`` for a
    single state) and ``reason`` names the failed invariant.
    """

    def __init__(self, message: str, cell=None, reason: str | None = None):
        super().__init__(message)
        self.cell = cell
        self.reason = reason


@dataclass(frozen=True)
class SpeciesParams:
    """One ideal-gas species with constant heats.

    The gas constant and ``c_p`` are derived from ``gamma`` and ``c_v``.
    """

    gamma: float
    c_v: float
    e0: float = 0.0

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")
        if not self.c_v > 0.0:
            raise ValueError(f"c_v must be positive, got {self.c_v}")

    @classmethod
    def from_gamma_r(cls, gamma: float, r: float, e0: float = 0.0) -> "SpeciesParams":
        return cls(gamma=gamma, c_v=r / (gamma - 1.0), e0=e0)

    @property
    def r(self) -> float:
        return (self.gamma - 1.0) * self.c_v

    @property
    def c_p(self) -> float:
        return self.gamma * self.c_v


@dataclass(frozen=True)
class GasMixture:
    species: tuple[SpeciesParams, ...]
    c_v: np.ndarray = field(init=False, repr=False, compare=False)
    r: np.ndarray = field(init=False, repr=False, compare=False)
    e0: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        species = tuple(self.species)
        if len(species) < 1:
            raise ValueError("a mixture needs at least one species")
        object.__setattr__(self, "species", species)
        object.__setattr__(self, "c_v", np.array([s.c_v for s in species]))
        object.__setattr__(self, "r", np.array([s.r for s in species]))
        object.__setattr__(self, "e0", np.array([s.e0 for s in species]))

    @classmethod
    def from_gamma_r(cls, gammas: Sequence[float], rs: Sequence[float],
                     e0s: Sequence[float] | None = None) -> "GasMixture":
        if e0s is None:
            e0s = [0.0] * len(gammas)
        return cls(tuple(SpeciesParams.from_gamma_r(g, r, e)
                         for g, r, e in zip(gammas, rs, e0s, strict=True)))

    @property
    def n(self) -> int:
        return len(self.species)

    @property
    def gamma_min(self) -> float:
        return min(s.gamma for s in self.species)

    @property
    def gamma_max(self) -> float:
        return max(s.gamma for s in self.species)

    @property
    def c_p(self) -> np.ndarray:
        return self.c_v + self.r

    def dim_of(self, U: np.ndarray) -> int:
        """Spatial dimension implied by the length of the component axis."""
        N = np.shape(U)[0] - self.n - 1
        if N < 1:
            raise ValueError(f"state has {np.shape(U)[0]} components, "
                             f"too few for {self.n} species")
        return N

    def nvar(self, dim: int) -> int:
        return self.n + dim + 1

    def as_dict(self) -> dict:
        return {"gamma": [s.gamma for s in self.species],
                "c_v": [s.c_v for s in self.species],
                "r": [s.r for s in self.species],
                "e0": [s.e0 for s in self.species]}


@dataclass
class ConservedState:
    partial_densities: np.ndarray
    momentum: np.ndarray
    total_energy: float | np.ndarray

    @property
    def density(self):
        return np.sum(self.partial_densities, axis=0)

    def to_array(self) -> np.ndarray:
        rho = np.atleast_1d(np.asarray(self.partial_densities, dtype=float))
        m = np.atleast_1d(np.asarray(self.momentum, dtype=float))
        E = np.asarray(self.total_energy, dtype=float)[None, ...]
        return np.concatenate([rho, m, E], axis=0)

    @classmethod
    def from_array(cls, U: np.ndarray, mix: GasMixture) -> "ConservedState":
        n = mix.n
        return cls(U[:n].copy(), U[n:-1].copy(), U[-1].copy())


@dataclass
class PrimitiveState:
    partial_densities: np.ndarray
    velocity: np.ndarray
    pressure: float | np.ndarray
    temperature: float | np.ndarray


@dataclass
class EntropyQuantities:
    eta: np.ndarray
    s: np.ndarray
    V: np.ndarray
    entropy_flux_coeff: np.ndarray
    psi: np.ndarray | None = None


def _split(U, mix: GasMixture):
    U = np.asarray(U, dtype=float)
    n = mix.n
    return U[:n], U[n:-1], U[-1]


def _bcast(coef: np.ndarray, like: np.ndarray) -> np.ndarray:
    return coef.reshape(coef.shape + (1,) * (like.ndim - 1))


def _first_bad(mask: np.ndarray):
    idx = np.argwhere(mask)
    if idx.size == 0:
        return None
    return tuple(int(i) for i in idx[0])


def _require_positive_densities(rho_i: np.ndarray):
    bad = ~(rho_i > 0.0)
    if np.any(bad):
        if bad.ndim == 1:
            cell, species = None, int(np.argmax(bad))
        else:
            cell = _first_bad(np.any(bad, axis=0))
            species = int(np.argmax(bad[(slice(None),) + cell]))
        raise InadmissibleStateError(
            f"partial density of species {species + 1} is non-positive"
            + (f" in cell {cell}" if cell else ""),
            cell=cell, reason=f"rho_{species + 1} <= 0")


def _require_positive_temperature(T: np.ndarray):
    bad = ~(np.asarray(T) > 0.0)
    if np.any(bad):
        cell = _first_bad(bad) if np.ndim(T) else None
        raise InadmissibleStateError(
            "temperature is non-positive" + (f" in cell {cell}" if cell else ""),
            cell=cell, reason="T <= 0")


def temperature_from_conserved(U, mix: GasMixture) -> np.ndarray:
    """Invert the caloric law for the temperature.

    No positivity guarantee on the result; see :func:`is_admissible`.
    """
    rho_i, m, E = _split(U, mix)
    _require_positive_densities(rho_i)
    rho = rho_i.sum(axis=0)
    kinetic = 0.5 * np.sum(m * m, axis=0) / rho
    ref = np.sum(_bcast(mix.e0, rho_i) * rho_i, axis=0)
    heat = np.sum(_bcast(mix.c_v, rho_i) * rho_i, axis=0)
    return (E - kinetic - ref) / heat


def is_admissible(U, mix: GasMixture) -> bool:
    rho_i, _, _ = _split(U, mix)
    if not np.all(rho_i > 0.0):
        return False
    return bool(np.all(temperature_from_conserved(U, mix) > 0.0))


def check_admissible(U, mix: GasMixture) -> np.ndarray:
    """Raise :class:`InadmissibleStateError` unless ``U`` is admissible.

    Returns the temperature as a by-product.
    """
    T = temperature_from_conserved(U, mix)
    _require_positive_temperature(T)
    return T


def pressure(U, mix: GasMixture) -> np.ndarray:
    rho_i = np.asarray(U, dtype=float)[:mix.n]
    T = check_admissible(U, mix)
    return np.sum(_bcast(mix.r, rho_i) * rho_i, axis=0) * T


def conserved_to_primitive(U, mix: GasMixture) -> PrimitiveState:
    rho_i, m, _ = _split(U, mix)
    T = check_admissible(U, mix)
    p = np.sum(_bcast(mix.r, rho_i) * rho_i, axis=0) * T
    return PrimitiveState(rho_i.copy(), m / rho_i.sum(axis=0), p, T)


def _pad(a: np.ndarray, ndim: int) -> np.ndarray:
    """Append unit axes so that the component axis stays leading under broadcasting."""
    return a.reshape(a.shape + (1,) * (ndim + 1 - a.ndim))


def primitive_to_conserved(rho_i, u, p, mix: GasMixture) -> np.ndarray:
    """Build ``U`` from partial densities, velocity and pressure."""
    rho_i = np.asarray(rho_i, dtype=float)
    u = np.asarray(u, dtype=float)
    p = np.asarray(p, dtype=float)
    shape = np.broadcast_shapes(rho_i.shape[1:], u.shape[1:], p.shape)
    rho_i = np.broadcast_to(_pad(rho_i, len(shape)), rho_i.shape[:1] + shape)
    u = np.broadcast_to(_pad(u, len(shape)), u.shape[:1] + shape)
    rho = rho_i.sum(axis=0)
    R = np.sum(_bcast(mix.r, rho_i) * rho_i, axis=0)
    T = p / R
    heat = np.sum(_bcast(mix.c_v, rho_i) * rho_i, axis=0)
    ref = np.sum(_bcast(mix.e0, rho_i) * rho_i, axis=0)
    E = ref + heat * T + 0.5 * rho * np.sum(u * u, axis=0)
    return np.concatenate([rho_i, rho * u, E[None]], axis=0)


def primitive_to_conserved_T(rho_i, u, T, mix: GasMixture) -> np.ndarray:
    """Like :func:`primitive_to_conserved` but with the temperature given."""
    rho_i = np.asarray(rho_i, dtype=float)
    R = np.sum(_bcast(mix.r, rho_i) * rho_i, axis=0)
    return primitive_to_conserved(rho_i, u, R * np.asarray(T, dtype=float), mix)


def mixture_entropy(U, mix: GasMixture):
    """Specific entropy ``s`` and entropy density ``eta = -rho s``."""
    rho_i, _, _ = _split(U, mix)
    T = check_admissible(U, mix)
    rho = rho_i.sum(axis=0)
    rs = np.sum(rho_i * (_bcast(mix.c_v, rho_i) * np.log(T)
                         - _bcast(mix.r, rho_i) * np.log(rho_i)), axis=0)
    s = rs / rho
    return s, -rs


def temperature_from_entropy_density(rho_i, rho_s, mix: GasMixture) -> np.ndarray:
    """Temperature from partial densities and ``rho * s``.

    ``rho_s`` is the physical entropy density, i.e. ``-eta``.
    """
    rho_i = np.asarray(rho_i, dtype=float)
    _require_positive_densities(rho_i)
    rho = rho_i.sum(axis=0)
    cv_bar = np.sum(_bcast(mix.c_v, rho_i) * rho_i, axis=0) / rho
    mixing = np.sum(_bcast(mix.r, rho_i) * rho_i * np.log(rho_i), axis=0) / rho
    return np.exp((np.asarray(rho_s) / rho + mixing) / cv_bar)


def entropy_variables(U, mix: GasMixture) -> np.ndarray:
    """Gradient of ``eta`` with respect to the conserved variables."""
    rho_i, m, _ = _split(U, mix)
    T = check_admissible(U, mix)
    rho = rho_i.sum(axis=0)
    u = m / rho
    half_u2 = 0.5 * np.sum(u * u, axis=0)
    cv = _bcast(mix.c_v, rho_i)
    r = _bcast(mix.r, rho_i)
    e0 = _bcast(mix.e0, rho_i)
    V_rho = cv * (1.0 - np.log(T)) + r * (1.0 + np.log(rho_i)) + (e0 - half_u2) / T
    V_m = u / T
    V_E = -1.0 / T
    return np.concatenate([V_rho, V_m, V_E[None]], axis=0)


def sound_speed(U, mix: GasMixture) -> np.ndarray:
    """Frozen mixture sound speed ``sqrt(gamma_mix p / rho)``."""
    rho_i = np.asarray(U, dtype=float)[:mix.n]
    p = pressure(U, mix)
    if np.any(~(p > 0.0)):
        raise InadmissibleStateError("pressure is non-positive", reason="p <= 0")
    cp = np.sum(_bcast(mix.c_p, rho_i) * rho_i, axis=0)
    cv = np.sum(_bcast(mix.c_v, rho_i) * rho_i, axis=0)
    return np.sqrt(cp / cv * p / rho_i.sum(axis=0))


def entropy_potential(U, normal, mix: GasMixture) -> np.ndarray:
    """``psi . n = V . (f(U) n) - F(U) . n``."""
    from .flux import physical_flux

    V = entropy_variables(U, mix)
    _, eta = mixture_entropy(U, mix)
    rho_i, m, _ = _split(U, mix)
    n = np.asarray(normal, dtype=float)
    un = np.tensordot(n, m, axes=(0, 0)) / rho_i.sum(axis=0)
    return np.sum(V * physical_flux(U, n, mix), axis=0) - eta * un


def entropy_quantities(U, mix: GasMixture, normal=None) -> EntropyQuantities:
    s, eta = mixture_entropy(U, mix)
    V = entropy_variables(U, mix)
    psi = None if normal is None else entropy_potential(U, normal, mix)
    return EntropyQuantities(eta=eta, s=s, V=V, entropy_flux_coeff=eta, psi=psi)


def mass_fraction_view(U, mix: GasMixture):
    """Total density and the first ``n - 1`` mass fractions."""
    rho_i = np.asarray(U, dtype=float)[:mix.n]
    rho = rho_i.sum(axis=0)
    if np.any(~(rho > 0.0)):
        raise InadmissibleStateError("total density is non-positive", reason="rho <= 0")
    return rho, rho_i[:-1] / rho


def from_mass_fractions(rho, Y, rest) -> np.ndarray:
    """Inverse of :func:`mass_fraction_view`; ``rest`` is ``(m, E)`` stacked."""
    rho = np.asarray(rho, dtype=float)
    Y = np.asarray(Y, dtype=float).reshape((-1,) + rho.shape)
    rho_head = Y * rho
    rho_last = rho - rho_head.sum(axis=0)
    return np.concatenate([rho_head, rho_last[None], np.asarray(rest, dtype=float)], axis=0)
