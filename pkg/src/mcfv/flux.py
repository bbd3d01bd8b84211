"""Physical and Lax-Friedrichs numerical fluxes, plus the entropy fluxes."""

from __future__ import annotations

import numpy as np

from .thermo import (GasMixture, _split, entropy_variables, mixture_entropy,
                     pressure, sound_speed)


def _dot_normal(normal, vec):
    n = np.asarray(normal, dtype=float)
    return np.tensordot(n, vec, axes=(0, 0)) if n.ndim == 1 else np.sum(n * vec, axis=0)


def _normal_like(normal, m):
    n = np.asarray(normal, dtype=float)
    if n.ndim == 1:
        return n.reshape(n.shape + (1,) * (m.ndim - 1))
    return n


def physical_flux(U, normal, mix: GasMixture) -> np.ndarray:
    """Flux of the mixture Euler system projected on ``normal``.

    ``normal`` is either one vector of length N or an array broadcastable
    against the momentum block.
    """
    U = np.asarray(U, dtype=float)
    rho_i, m, E = _split(U, mix)
    p = pressure(U, mix)
    un = _dot_normal(normal, m) / rho_i.sum(axis=0)
    n = _normal_like(normal, m)
    return np.concatenate([rho_i * un, m * un + p * n, ((E + p) * un)[None]], axis=0)


def wave_speed(U, mix: GasMixture) -> np.ndarray:
    """``|u| + c_mix`` per state."""
    rho_i, m, _ = _split(U, mix)
    speed = np.sqrt(np.sum(m * m, axis=0)) / rho_i.sum(axis=0)
    return speed + sound_speed(U, mix)


def local_lambda(U_K, U_L, mix: GasMixture) -> np.ndarray:
    return np.maximum(wave_speed(U_K, mix), wave_speed(U_L, mix))


def global_lambda(field, mix: GasMixture) -> float:
    data = getattr(field, "data", field)
    return float(np.max(wave_speed(data, mix)))


def lax_friedrichs_flux(U_K, U_L, normal, lam, mix: GasMixture,
                        f_K=None, f_L=None) -> np.ndarray:
    """``(f(U_K) + f(U_L)) n / 2 - lam/2 (U_L - U_K)``.

    Precomputed physical fluxes may be passed to skip re-evaluation.
    """
    if f_K is None:
        f_K = physical_flux(U_K, normal, mix)
    if f_L is None:
        f_L = physical_flux(U_L, normal, mix)
    return 0.5 * (f_K + f_L) - 0.5 * lam * (np.asarray(U_L) - np.asarray(U_K))


def entropy_flux(U, normal, mix: GasMixture) -> np.ndarray:
    """Physical entropy flux ``eta u . n``."""
    rho_i, m, _ = _split(U, mix)
    _, eta = mixture_entropy(U, mix)
    return eta * _dot_normal(normal, m) / rho_i.sum(axis=0)


def numerical_entropy_flux(U_K, U_L, normal, lam, mix: GasMixture) -> np.ndarray:
    """Entropy flux paired with the Lax-Friedrichs flux."""
    _, eta_K = mixture_entropy(U_K, mix)
    _, eta_L = mixture_entropy(U_L, mix)
    central = 0.5 * (entropy_flux(U_K, normal, mix) + entropy_flux(U_L, normal, mix))
    return central - 0.5 * lam * (eta_L - eta_K)


def general_entropy_flux(U_K, U_L, normal, lam, mix: GasMixture) -> np.ndarray:
    """Averaged-variables form ``mean(V) . F_KL - mean(psi)``.

    Differs from :func:`numerical_entropy_flux` by
    ``-(V_L - V_K) . (f_L - f_K) / 4 + (r_KL - r_LK) / 2``.
    """
    from .thermo import entropy_potential

    F = lax_friedrichs_flux(U_K, U_L, normal, lam, mix)
    V_bar = 0.5 * (entropy_variables(U_K, mix) + entropy_variables(U_L, mix))
    psi_bar = 0.5 * (entropy_potential(U_K, normal, mix) + entropy_potential(U_L, normal, mix))
    return np.sum(V_bar * F, axis=0) - psi_bar
