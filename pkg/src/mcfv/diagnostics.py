"""Entropy, stability and consistency functionals of discrete solutions."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .mesh import Field, Grid, neighbor, project
from .solver import CellState, FaceData, axis_flux, cell_state, face_fluxes, flux_divergence
from .thermo import (GasMixture, entropy_variables, mixture_entropy)


def entropy_production(U_K, U_L, lam, mix: GasMixture):
    """``r_KL = lam/2 [(eta_L - eta_K) - V_K . (U_L - U_K)]``, non-negative by convexity."""
    _, eta_K = mixture_entropy(U_K, mix)
    _, eta_L = mixture_entropy(U_L, mix)
    V_K = entropy_variables(U_K, mix)
    jump = np.asarray(U_L, dtype=float) - np.asarray(U_K, dtype=float)
    return 0.5 * lam * ((eta_L - eta_K) - np.sum(V_K * jump, axis=0))


def relative_entropy(U, U_bar, mix: GasMixture):
    """Bregman distance of ``eta`` between ``U`` and ``U_bar``."""
    _, eta = mixture_entropy(U, mix)
    _, eta_bar = mixture_entropy(U_bar, mix)
    V_bar = entropy_variables(U_bar, mix)
    diff = np.asarray(U, dtype=float) - np.asarray(U_bar, dtype=float)
    return eta - eta_bar - np.sum(V_bar * diff, axis=0)


def entropy_hessian(U, mix: GasMixture, step: float = 1e-5) -> np.ndarray:
    """Central-difference Hessian of ``eta`` at a single state."""
    U = np.asarray(U, dtype=float)
    k = U.size
    H = np.empty((k, k))
    scale = np.maximum(np.abs(U), 1.0) * step
    for j in range(k):
        e = np.zeros(k)
        e[j] = scale[j]
        H[:, j] = (entropy_variables(U + e, mix) - entropy_variables(U - e, mix)) / (2 * scale[j])
    return 0.5 * (H + H.T)


# -- cell entropy inequality ---------------------------------------------------

def _entropy_cells(cs: CellState, mix: GasMixture):
    _, eta = mixture_entropy(cs.U, mix)
    return eta, entropy_variables(cs.U, mix)


def entropy_residual_from_faces(cs: CellState, faces: list[FaceData], dudt: np.ndarray,
                                grid: Grid, mix: GasMixture):
    """Per-cell ``|K| V_K . dU_K/dt + sum_L |S_KL| Fhat_KL`` and a magnitude scale.

    The scale sums the absolute values of every term entering the residual so
    that the ratio is a roundoff-relative quantity.
    """
    eta, V = _entropy_cells(cs, mix)
    vol = grid.cell_volume
    res = vol * np.sum(V * dudt, axis=0)
    scale = np.zeros(grid.cells)
    for fd in faces:
        area = grid.face_area(fd.d)
        q = eta * cs.u[fd.d]
        fhat = 0.5 * (q + neighbor(q[None], fd.d)[0]) - 0.5 * fd.lam * (neighbor(eta[None], fd.d)[0] - eta)
        res += area * (fhat - neighbor(fhat[None], fd.d, -1)[0])
        scale += area * (np.sum(np.abs(V * fd.flux), axis=0)
                         + np.sum(np.abs(V * neighbor(fd.flux, fd.d, -1)), axis=0)
                         + np.abs(fhat) + np.abs(neighbor(fhat[None], fd.d, -1)[0]))
    return res, np.maximum(scale, np.finfo(float).tiny)


def cell_entropy_residual(field: Field, d_field_dt: Field, mix: GasMixture,
                          mode: str = "local") -> Field:
    """Semi-discrete cell entropy inequality residual; should be ``<= 0``.

    ``d_field_dt`` must be the source-free right-hand side of ``field``.
    """
    cs = cell_state(field.data, mix)
    faces = face_fluxes(cs, field.grid, mix, mode)
    res, _ = entropy_residual_from_faces(cs, faces, d_field_dt.data, field.grid, mix)
    return Field(field.grid, res[None])


def entropy_residual_decomposition(field: Field, mix: GasMixture, mode: str = "local"):
    """Exact split of the cell entropy residual into flux-pairing and production parts.

    Returns ``(pairing, production)`` per cell with
    ``residual = pairing - production`` where
    ``pairing = sum_L |S| (Fent_K + Fent_L - V_K . (f_K + f_L)) . n / 2`` and
    ``production = sum_L |S| r_KL`` with the one-sided ``r_KL``.
    """
    grid = field.grid
    cs = cell_state(field.data, mix)
    eta, V = _entropy_cells(cs, mix)
    pairing = np.zeros(grid.cells)
    production = np.zeros(grid.cells)
    for fd in face_fluxes(cs, grid, mix, mode):
        area = grid.face_area(fd.d)
        q = eta * cs.u[fd.d]
        for sign in (1, -1):
            # sign=+1: face K+e_d with normal +e_d; sign=-1: face K-e_d with normal -e_d
            qL = neighbor(q[None], fd.d, sign)[0]
            fK = fd.f_K
            fL = neighbor(fK, fd.d, sign)
            UL = neighbor(cs.U, fd.d, sign)
            etaL = neighbor(eta[None], fd.d, sign)[0]
            lam = fd.lam if sign == 1 else neighbor(fd.lam[None], fd.d, -1)[0]
            pairing += sign * area * 0.5 * (q + qL - np.sum(V * (fK + fL), axis=0))
            production += area * 0.5 * lam * ((etaL - eta) - np.sum(V * (UL - cs.U), axis=0))
    return pairing, production


# -- scalar monitors ---------------------------------------------------------------

def chi_piecewise_linear(z, Z_star):
    return np.minimum(np.asarray(z) - Z_star, 0.0)


def chi_smooth(sharpness: float = 50.0):
    """Concave, non-decreasing, negative cutoff ``-softplus(k (Z* - z)) / k``."""
    def chi(z, Z_star):
        return -np.logaddexp(0.0, sharpness * (Z_star - np.asarray(z))) / sharpness
    return chi


def renormalized_entropy_monitor(field: Field, mix: GasMixture, Z_star: float,
                                 chi: Callable = chi_piecewise_linear) -> float:
    """``sum_K |K| (-rho_K chi(s_K))``."""
    s, _ = mixture_entropy(field.data, mix)
    rho = field.data[:mix.n].sum(axis=0)
    return float(field.grid.cell_volume * np.sum(-rho * chi(s, Z_star)))


def weak_bv_functional(field: Field, mix: GasMixture, mode: str = "local",
                       faces: list[FaceData] | None = None):
    """``(bv_l1, bv_l2)``: ``sum_KL h^N lam_KL |U_L - U_K|`` and its squared-jump variant."""
    grid = field.grid
    if faces is None:
        faces = face_fluxes(cell_state(field.data, mix), grid, mix, mode)
    vol = grid.cell_volume
    l1 = l2 = 0.0
    for fd in faces:
        sq = np.sum(fd.jump * fd.jump, axis=0)
        l1 += vol * float(np.sum(fd.lam * np.sqrt(sq)))
        l2 += vol * float(np.sum(fd.lam * sq))
    return l1, l2


def norm_monitors(field: Field, mix: GasMixture) -> dict:
    """Discrete a-priori norms: ``L^gamma_min`` of rho, ``L^k`` of m, ``L^1`` of rho_i, p, E."""
    grid = field.grid
    vol = grid.cell_volume
    cs = cell_state(field.data, mix)
    g = mix.gamma_min
    k = 2.0 * g / (g + 1.0)
    mnorm = np.sqrt(np.sum(field.data[mix.n:-1] ** 2, axis=0))
    out = {
        "rho_Lgamma": float((vol * np.sum(cs.rho ** g)) ** (1.0 / g)),
        "m_Lk": float((vol * np.sum(mnorm ** k)) ** (1.0 / k)),
        "p_L1": float(vol * np.sum(np.abs(cs.p))),
        "E_L1": float(vol * np.sum(np.abs(field.data[-1]))),
    }
    for i in range(mix.n):
        out[f"rho{i + 1}_L1"] = float(vol * np.sum(np.abs(field.data[i])))
    return out


# -- time series -------------------------------------------------------------------

@dataclass
class DiagnosticsTimeSeries:
    nspecies: int
    mix: GasMixture
    mode: str
    Z_star: float
    times: list[float] = dc_field(default_factory=list)
    rows: list[dict] = dc_field(default_factory=list)

    @classmethod
    def start(cls, initial: Field, mix: GasMixture, mode: str = "local") -> "DiagnosticsTimeSeries":
        s, _ = mixture_entropy(initial.data, mix)
        series = cls(mix.n, mix, mode, float(np.min(s)))
        series.record(0.0, 0.0, initial)
        return series

    def record(self, t: float, dt: float, field: Field):
        if self.times and not t > self.times[-1]:
            raise ValueError("diagnostic times must be strictly increasing")
        mix = self.mix
        cs = cell_state(field.data, mix)
        faces = face_fluxes(cs, field.grid, mix, self.mode)
        s, eta = mixture_entropy(field.data, mix)
        totals = field.integral()
        bv1, bv2 = weak_bv_functional(field, mix, faces=faces)
        row = {"t": t, "dt": dt}
        for i in range(mix.n):
            row[f"mass_{i + 1}"] = float(totals[i])
        row["energy"] = float(totals[-1])
        row["eta_total"] = float(field.grid.cell_volume * np.sum(eta))
        for i in range(mix.n):
            row[f"min_rho_{i + 1}"] = float(np.min(field.data[i]))
        row["min_p"] = float(np.min(cs.p))
        row["min_T"] = float(np.min(cs.T))
        row["min_s"] = float(np.min(s))
        row["bv_l1"] = bv1
        row["bv_l2"] = bv2
        row["renormalized"] = float(field.grid.cell_volume
                                    * np.sum(-cs.rho * chi_piecewise_linear(s, self.Z_star)))
        row.update(norm_monitors(field, mix))
        self.times.append(t)
        self.rows.append(row)

    def column(self, name: str) -> np.ndarray:
        return np.array([r[name] for r in self.rows])

    @property
    def columns(self) -> list[str]:
        return list(self.rows[0]) if self.rows else []

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=self.columns, lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow({k: repr(float(v)) for k, v in r.items()})
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    def time_integral(self, name: str) -> float:
        return float(np.trapezoid(self.column(name), np.array(self.times)))


# -- consistency residual ------------------------------------------------------------

@dataclass(frozen=True)
class TestFunction:
    """Smooth periodic test function with analytic derivatives.

    ``phi(t, x)`` returns shape ``x.shape[1:]``; ``grad(t, x)`` returns
    ``(dim, *x.shape[1:])``; ``dt(t, x)`` the time derivative.
    """

    name: str
    phi: Callable
    grad: Callable
    dt: Callable

    __test__ = False


def _const_phi(value=1.0):
    return TestFunction(
        "const",
        lambda t, x: np.full(x.shape[1:], value),
        lambda t, x: np.zeros_like(x),
        lambda t, x: np.zeros(x.shape[1:]))


def _cos_product(k: float = 2.0 * np.pi):
    def phi(t, x):
        return np.prod(np.cos(k * x), axis=0) * (1.0 + t)

    def grad(t, x):
        c = np.cos(k * x)
        out = np.empty_like(x)
        for d in range(x.shape[0]):
            others = np.prod(np.delete(c, d, axis=0), axis=0) if x.shape[0] > 1 else 1.0
            out[d] = -k * np.sin(k * x[d]) * others * (1.0 + t)
        return out

    def dt(t, x):
        return np.prod(np.cos(k * x), axis=0)

    return TestFunction("cos2pi", phi, grad, dt)


TEST_FUNCTIONS = {"const": _const_phi(), "cos2pi": _cos_product()}


class ConsistencyMonitor:
    """Accumulates the consistency residual of a run against a test function.

    Use as a solver observer.  Components are ``rho1..rhon``, ``m`` and
    ``eta``; the momentum component pairs ``m`` with ``(phi, ..., phi)``.
    Per observed time the monitor records the terms

    - ``I``: Lax-Friedrichs diffusion paired with jumps of the projected phi,
    - ``III``: central (or, for eta, one-sided) flux pairing minus the exact
      flux-gradient pairing,
    - ``IV``: eta only; the central entropy flux minus its one-sided value,
    - ``S``: midpoint source quadrature error (forced problems only),

    and ``II`` is the bracket ``[int U_h (phi - Pi_h phi)]`` at the two ends.
    """

    def __init__(self, grid: Grid, mix: GasMixture, test: TestFunction,
                 mode: str = "local", source: Callable | None = None,
                 quadrature_order: int = 3):
        self.grid, self.mix, self.test, self.mode = grid, mix, test, mode
        self.source = source
        self.order = quadrature_order
        self.components = [f"rho{i + 1}" for i in range(mix.n)] + ["m", "eta"]
        self.times: list[float] = []
        self.terms: dict[str, list[dict]] = {c: [] for c in self.components}
        self._bracket: dict[str, list[float]] = {c: [] for c in self.components}

    def _proj(self, f) -> np.ndarray:
        return project(f, self.grid, self.order).data

    def __call__(self, t: float, field: Field):
        grid, mix = self.grid, self.mix
        vol = grid.cell_volume
        U = field.data
        n = mix.n
        cs = cell_state(U, mix)
        faces = face_fluxes(cs, grid, mix, self.mode)
        eta, V = _entropy_cells(cs, mix)

        pphi = self._proj(lambda x: self.test.phi(t, x))[0]
        pgrad = self._proj(lambda x: self.test.grad(t, x))
        dpphi = [neighbor(pphi[None], d)[0] - pphi for d in range(grid.dim)]

        # midpoint source and its exact pairing
        src_err = {c: 0.0 for c in self.components}
        if self.source is not None:
            x = grid.centers()
            q_mid = np.asarray(self.source(t, x))
            pq = self._proj(lambda y: self.test.phi(t, y) * self.source(t, y))
            for i in range(n):
                src_err[f"rho{i + 1}"] = vol * float(np.sum(pphi * q_mid[i] - pq[i]))
            src_err["m"] = vol * float(np.sum(pphi * q_mid[n:-1] - pq[n:-1]))
            src_err["eta"] = vol * float(np.sum(V * (pphi * q_mid - pq)))

        # term II: U_h is cellwise constant, so int_K U_h (phi - Pi_h phi) = 0 per cell
        for c in self.components:
            self._bracket[c].append(0.0)

        for i in range(n):
            c = f"rho{i + 1}"
            I = III = 0.0
            for fd in faces:
                area = grid.face_area(fd.d)
                I += -area * float(np.sum(0.5 * fd.lam * fd.jump[i] * dpphi[fd.d]))
                III += area * float(np.sum(0.5 * (fd.f_K[i] + fd.f_L[i]) * dpphi[fd.d]))
                III -= vol * float(np.sum(fd.f_K[i] * pgrad[fd.d]))
            self.terms[c].append({"I": I, "III": III, "IV": 0.0, "S": src_err[c]})

        I = III = 0.0
        for fd in faces:
            area = grid.face_area(fd.d)
            mom = slice(n, n + grid.dim)
            I += -area * float(np.sum(0.5 * fd.lam * fd.jump[mom] * dpphi[fd.d]))
            III += area * float(np.sum(0.5 * (fd.f_K[mom] + fd.f_L[mom]) * dpphi[fd.d]))
            # f(U):grad(phi, ..., phi) -> sum over rows of the flux tensor
            III -= vol * float(np.sum(fd.f_K[mom] * pgrad[fd.d]))
        self.terms["m"].append({"I": I, "III": III, "IV": 0.0, "S": src_err["m"]})

        I = III = IV = 0.0
        for fd in faces:
            area = grid.face_area(fd.d)
            q = eta * cs.u[fd.d]
            qL = neighbor(q[None], fd.d)[0]
            etaL = neighbor(eta[None], fd.d)[0]
            I += -area * float(np.sum(0.5 * fd.lam * (etaL - eta) * dpphi[fd.d]))
            III += area * float(np.sum(q * dpphi[fd.d])) - vol * float(np.sum(q * pgrad[fd.d]))
            IV += area * float(np.sum(0.5 * (qL - q) * dpphi[fd.d]))
        self.terms["eta"].append({"I": I, "III": III, "IV": IV, "S": src_err["eta"]})
        self.times.append(t)

    def residual_series(self, component: str) -> np.ndarray:
        return np.array([sum(r.values()) for r in self.terms[component]])

    def integrated(self, component: str) -> float:
        """``int_0^tau |R_h| dt`` by the trapezoid rule plus ``|II|``."""
        R = np.abs(self.residual_series(component))
        bracket = self._bracket[component]
        II = abs(bracket[-1] - bracket[0]) if bracket else 0.0
        if len(self.times) < 2:
            return II
        return float(np.trapezoid(R, np.array(self.times))) + II

    def report(self) -> dict:
        return {c: self.integrated(c) for c in self.components}


def consistency_residual_direct(field: Field, dudt: Field, mix: GasMixture,
                                test: TestFunction, t: float, component: str,
                                source: Callable | None = None,
                                mode: str = "local", quadrature_order: int = 3) -> float:
    """Residual rate from its definition, for cross-checking the term split.

    ``int phi dU_h/dt - int f(U_h):grad phi - int phi q`` (species and
    momentum); for ``eta`` the cell production is removed first.
    """
    grid = field.grid
    vol = grid.cell_volume
    n = mix.n
    U = field.data
    cs = cell_state(U, mix)
    pphi = project(lambda x: test.phi(t, x), grid, quadrature_order).data[0]
    pgrad = project(lambda x: test.grad(t, x), grid, quadrature_order).data
    pq = None
    if source is not None:
        pq = project(lambda y: test.phi(t, y) * source(t, y), grid, quadrature_order).data
    fluxes = [axis_flux(cs, d, mix) for d in range(grid.dim)]
    if component.startswith("rho"):
        i = int(component[3:]) - 1
        val = vol * np.sum(pphi * dudt.data[i])
        val -= vol * sum(np.sum(fluxes[d][i] * pgrad[d]) for d in range(grid.dim))
        if pq is not None:
            val -= vol * np.sum(pq[i])
        return float(val)
    if component == "m":
        mom = slice(n, n + grid.dim)
        val = vol * np.sum(pphi * dudt.data[mom])
        val -= vol * sum(np.sum(fluxes[d][mom] * pgrad[d]) for d in range(grid.dim))
        if pq is not None:
            val -= vol * np.sum(pq[mom])
        return float(val)
    if component == "eta":
        eta, V = _entropy_cells(cs, mix)
        faces = face_fluxes(cs, grid, mix, mode)
        div = flux_divergence(faces, grid)
        res, _ = entropy_residual_from_faces(cs, faces, div, grid, mix)
        deta = np.sum(V * dudt.data, axis=0) - res / vol
        val = vol * np.sum(pphi * deta)
        val -= vol * sum(np.sum(eta * cs.u[d] * pgrad[d]) for d in range(grid.dim))
        if pq is not None:
            val -= vol * np.sum(V * pq)
        return float(val)
    raise ValueError(f"unknown component {component!r}")


def relative_entropy_total(field: Field, exact: Callable[[np.ndarray], np.ndarray],
                           mix: GasMixture) -> float:
    """``sum_K |K| H(U_K | U_exact(x_K))``; no defect term exists at fixed h."""
    Ubar = exact(field.grid.centers())
    return float(field.grid.cell_volume * np.sum(relative_entropy(field.data, Ubar, mix)))
