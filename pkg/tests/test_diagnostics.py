import numpy as np
import pytest

from mcfv.cases import KHIConfig, khi_initial, khi_mixture
from mcfv.diagnostics import (TEST_FUNCTIONS, ConsistencyMonitor, DiagnosticsTimeSeries,
                              cell_entropy_residual, chi_piecewise_linear, chi_smooth,
                              consistency_residual_direct, entropy_hessian, entropy_production,
                              entropy_residual_decomposition, norm_monitors, relative_entropy,
                              renormalized_entropy_monitor, weak_bv_functional)
from mcfv.mesh import Field, Grid
from mcfv.solver import FaceData, SolverConfig, rhs, run
from mcfv.thermo import (GasMixture, SpeciesParams, entropy_variables, mixture_entropy,
                         primitive_to_conserved, primitive_to_conserved_T)
from mcfv.flux import local_lambda


@pytest.fixture
def mix():
    return GasMixture((SpeciesParams(1.4, 2.5), SpeciesParams(1.67, 1.5)))


def rough_field(grid, mix, seed=0):
    rng = np.random.default_rng(seed)
    rho = rng.uniform(0.2, 2.0, (mix.n,) + grid.cells)
    u = rng.uniform(-1.0, 1.0, (grid.dim,) + grid.cells)
    p = rng.uniform(0.3, 3.0, grid.cells)
    return Field(grid, primitive_to_conserved(rho, u, p, mix))


def test_entropy_production_equal_states(mix):
    U = primitive_to_conserved(np.array([1.0, 0.4]), np.array([0.2, 0.1]), 1.1, mix)
    assert entropy_production(U, U, 2.0, mix) == 0.0


def test_entropy_production_small_jump_asymptotics(mix):
    U = primitive_to_conserved(np.array([1.0, 0.4]), np.array([0.2, 0.1]), 1.1, mix)
    H = entropy_hessian(U, mix)
    rng = np.random.default_rng(0)
    lam = 1.7
    for _ in range(10):
        dU = rng.normal(size=U.size)
        dU *= 1e-3 / np.linalg.norm(dU)
        r = entropy_production(U, U + dU, lam, mix)
        assert r == pytest.approx(0.25 * lam * dU @ H @ dU, rel=0.05)


def test_cell_residual_uniform_field_is_zero(mix):
    g = Grid.uniform(5, 2)
    U = primitive_to_conserved(np.array([1.0, 0.4]), np.array([0.2, 0.1]), 1.1, mix)
    f = Field(g, np.broadcast_to(U.reshape(-1, 1, 1), (5,) + g.cells).copy())
    res = cell_entropy_residual(f, rhs(f, mix, SolverConfig()), mix)
    assert np.abs(res.data).max() <= 1e-14


@pytest.mark.parametrize("mode", ["local", "global"])
def test_cell_residual_nonpositive_and_decomposition(mix, mode):
    g = Grid.uniform(7, 2)
    f = rough_field(g, mix)
    d = rhs(f, mix, SolverConfig(viscosity_mode=mode))
    res = cell_entropy_residual(f, d, mix, mode).data[0]
    pairing, production = entropy_residual_decomposition(f, mix, mode)
    scale = np.abs(pairing).max() + np.abs(production).max()
    np.testing.assert_allclose(res, pairing - production, rtol=0, atol=1e-12 * scale)
    assert res.max() <= 1e-10 * scale
    assert production.min() >= 0.0
    # global form: the residuals sum to sum_K |K| V_K . dU_K/dt
    V = entropy_variables(f.data, mix)
    assert res.sum() == pytest.approx(g.cell_volume * np.sum(V * d.data), abs=1e-12 * scale)


def test_khi_initial_residual_nonpositive():
    mix = khi_mixture()
    g = Grid.uniform(64, 2)
    f = khi_initial(KHIConfig(seed=0), g, mix)
    res = cell_entropy_residual(f, rhs(f, mix, SolverConfig()), mix).data[0]
    pairing, production = entropy_residual_decomposition(f, mix)
    assert res.max() <= 1e-10 * max(1.0, np.abs(production).max())
    # pairing vanishes on the flat background, so production carries the residual
    assert np.all(production >= 0.0)


def test_random_pair_production_nonnegative(mix):
    rng = np.random.default_rng(11)
    k = 10_000
    draw = lambda: primitive_to_conserved_T(rng.uniform(0.1, 3.0, (2, k)),
                                            rng.uniform(-2.0, 2.0, (2, k)) / np.sqrt(2),
                                            rng.uniform(0.5, 5.0, k), mix)
    UK, UL = draw(), draw()
    lam = local_lambda(UK, UL, mix)
    r = entropy_production(UK, UL, lam, mix)
    _, eK = mixture_entropy(UK, mix)
    _, eL = mixture_entropy(UL, mix)
    scale = lam * (np.abs(eK) + np.abs(eL) + np.sum(np.abs(entropy_variables(UK, mix) * (UL - UK)), axis=0))
    assert np.all(r >= -1e-12 * scale)


def test_renormalized_monitor_examples():
    mix = GasMixture((SpeciesParams(1.4, 1.0),))
    g = Grid((1,), ((0.0, 1.0),))
    U = primitive_to_conserved(np.array([2.0]), np.zeros(1), 1.3, mix)
    f = Field(g, U.reshape(-1, 1))
    s, _ = mixture_entropy(U, mix)
    assert renormalized_entropy_monitor(f, mix, float(s) + 1.0) == pytest.approx(2.0)
    assert renormalized_entropy_monitor(f, mix, float(s)) == 0.0
    assert renormalized_entropy_monitor(f, mix, float(s) - 1.0) == 0.0


def test_chi_cutoffs():
    z = np.linspace(-2, 2, 9)
    assert np.all(chi_piecewise_linear(z, 0.5) <= 0)
    chi = chi_smooth(200.0)
    vals = chi(z, 0.0)
    assert np.all(vals < 0) and np.all(np.diff(vals) >= 0)
    np.testing.assert_allclose(vals, chi_piecewise_linear(z, 0.0), atol=0.01)


def test_weak_bv_examples(mix):
    g = Grid.uniform(4, 2)
    U = primitive_to_conserved(np.array([1.0, 0.4]), np.zeros(2), 1.1, mix)
    uniform = Field(g, np.broadcast_to(U.reshape(-1, 1, 1), (5,) + g.cells).copy())
    assert weak_bv_functional(uniform, mix) == (0.0, 0.0)
    # two cells of width 1/2, every face jump of unit norm, lambda = 2
    line = Grid((2,), ((0.0, 1.0),))
    jump = np.zeros((4, 2))
    jump[0] = 1.0
    fd = FaceData(0, None, np.full(2, 2.0), jump, None, None)
    field = Field(line, np.ones((4, 2)))
    l1, l2 = weak_bv_functional(field, mix, faces=[fd])
    assert l1 == pytest.approx(2.0) and l2 == pytest.approx(2.0)


def test_norm_monitors(mix):
    g = Grid.uniform(4, 2)
    U = primitive_to_conserved(np.array([0.25, 0.75]), np.zeros(2), 0.7, mix)
    f = Field(g, np.broadcast_to(U.reshape(-1, 1, 1), (5,) + g.cells).copy())
    norms = norm_monitors(f, mix)
    assert norms["rho_Lgamma"] == pytest.approx(1.0)
    assert norms["p_L1"] == pytest.approx(0.7)
    rough = rough_field(g, mix, 3)
    n2 = norm_monitors(rough, mix)
    assert n2["p_L1"] <= (mix.gamma_max - 1.0) * n2["E_L1"]


def test_time_series_columns_and_csv(mix):
    f = rough_field(Grid.uniform(6, 2), mix)
    series = DiagnosticsTimeSeries.start(f, mix)
    for name in ("t", "dt", "mass_1", "mass_2", "energy", "eta_total", "min_rho_1", "min_p",
                 "min_T", "min_s", "bv_l1", "bv_l2", "renormalized"):
        assert name in series.columns
    with pytest.raises(ValueError):
        series.record(0.0, 0.0, f)
    text = series.to_csv()
    assert text.splitlines()[0].startswith("t,dt,mass_1,mass_2,energy")


def test_relative_entropy_and_coercivity(mix):
    U = primitive_to_conserved(np.array([1.0, 0.6]), np.array([0.3, -0.2]), 1.4, mix)
    assert relative_entropy(U, U, mix) == 0.0
    eig = np.linalg.eigvalsh(entropy_hessian(U, mix))
    rng = np.random.default_rng(5)
    for _ in range(100):
        d = rng.normal(size=U.size)
        eps = rng.uniform(1e-4, 1e-2)
        d *= eps / np.linalg.norm(d)
        H = relative_entropy(U + d, U, mix)
        assert 0.5 * eig[0] * eps ** 2 * 0.9 <= H <= 0.5 * eig[-1] * eps ** 2 * 1.1


def test_consistency_constant_phi_vanishes(mix):
    f = rough_field(Grid.uniform(6, 2), mix)
    mon = ConsistencyMonitor(f.grid, mix, TEST_FUNCTIONS["const"])
    run(f, mix, SolverConfig(t_end=0.02), observers=[mon], diagnostics=False)
    assert all(v <= 1e-12 for v in mon.report().values())


def test_consistency_uniform_field(mix):
    g = Grid.uniform(6, 2)
    U = primitive_to_conserved(np.array([1.0, 0.6]), np.array([0.3, -0.2]), 1.4, mix)
    f = Field(g, np.broadcast_to(U.reshape(-1, 1, 1), (5,) + g.cells).copy())
    mon = ConsistencyMonitor(g, mix, TEST_FUNCTIONS["cos2pi"])
    mon(0.3, f)
    for c in mon.components:
        terms = mon.terms[c][0]
        assert terms["I"] == 0.0
        assert abs(terms["III"]) <= 1e-12
        assert abs(terms["IV"]) <= 1e-12


@pytest.mark.parametrize("component", ["rho1", "rho2", "m", "eta"])
def test_consistency_terms_match_direct_definition(mix, component):
    g = Grid.uniform(8, 2)
    f = rough_field(g, mix, 7)
    test = TEST_FUNCTIONS["cos2pi"]
    t = 0.25
    mon = ConsistencyMonitor(g, mix, test)
    mon(t, f)
    d = rhs(f, mix, SolverConfig(), t)
    direct = consistency_residual_direct(f, d, mix, test, t, component)
    split = mon.residual_series(component)[0]
    assert split == pytest.approx(direct, rel=1e-12, abs=1e-14)


def test_relative_entropy_zero_only_at_equal_states(mix):
    rng = np.random.default_rng(9)
    Ubar = primitive_to_conserved(np.array([1.0, 0.6]), np.array([0.3, -0.2]), 1.4, mix)
    for _ in range(200):
        d = rng.normal(size=Ubar.size) * 10.0 ** rng.uniform(-9, -1)
        H = relative_entropy(Ubar + d, Ubar, mix)
        if H < 1e-14:
            assert np.linalg.norm(d) < 1e-6 * np.linalg.norm(Ubar)


def test_translation_invariance(mix):
    g = Grid.uniform(8, 2)
    f = rough_field(g, mix, 4)
    moved = f.shifted((3, -2))
    a, b = weak_bv_functional(f, mix), weak_bv_functional(moved, mix)
    assert a == pytest.approx(b, rel=1e-13)
    mon_a = ConsistencyMonitor(g, mix, TEST_FUNCTIONS["const"])
    mon_b = ConsistencyMonitor(g, mix, TEST_FUNCTIONS["const"])
    mon_a(0.0, f)
    mon_b(0.0, moved)
    for c in mon_a.components:
        assert mon_a.residual_series(c)[0] == pytest.approx(mon_b.residual_series(c)[0], abs=1e-13)
