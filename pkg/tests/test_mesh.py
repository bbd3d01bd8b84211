import numpy as np
import pytest

from mcfv.flux import lax_friedrichs_flux, local_lambda
from mcfv.mesh import (Field, Grid, discrete_divergence, field_to_csv, interfaces, neighbor,
                       project, prolong, read_snapshot, write_snapshot)
from mcfv.solver import SolverConfig, rhs
from mcfv.thermo import GasMixture, primitive_to_conserved


def test_grid_validation_and_geometry():
    with pytest.raises(ValueError):
        Grid((4, 4), ((0, 1),))
    with pytest.raises(ValueError):
        Grid((0,), ((0, 1),))
    with pytest.raises(ValueError):
        Grid((4,), ((1, 0),))
    g = Grid((4, 8), ((0, 1), (-1, 1)))
    assert g.h == (0.25, 0.25)
    assert g.cell_volume == 0.0625
    assert g.face_area(0) == 0.25
    assert g.ncells == 32
    assert g.ravel((4, -1)) == g.ravel((0, 7))
    assert g.unravel(g.ravel((2, 5))) == (2, 5)


def test_project_constant_and_linear():
    g = Grid.uniform(5, 2, -1, 1)
    f = project(lambda x: np.full(x.shape[1:], 3.25), g)
    assert np.all(f.data == 3.25)
    one = Grid((1,), ((0.2, 0.7),))
    val = project(lambda x: x[0], one).data[0, 0]
    assert val == pytest.approx(0.45, abs=1e-15)


def test_project_sine_cell_averages():
    g = Grid.uniform(16, 1, -1, 1)
    h = g.h[0]
    xc = g.centers()[0]
    avg = project(lambda x: np.sin(np.pi * x[0]), g, quadrature_order=6).data[0]
    exact = 2.0 / (np.pi * h) * np.sin(np.pi * xc) * np.sin(np.pi * h / 2)
    np.testing.assert_allclose(avg, exact, atol=1e-10)


def test_interface_counts():
    assert len(list(interfaces(Grid.uniform(4, 1)))) == 4
    assert len(list(interfaces(Grid.uniform(3, 2)))) == 18
    faces = list(interfaces(Grid.uniform(3, 2)))
    assert len({(K, L) for K, L, _, _ in faces}) == 18


def _assemble(field, mix, reverse):
    grid = field.grid
    U = field.data.reshape(field.data.shape[0], -1)
    out = np.zeros_like(U)
    for K, L, n, area in interfaces(grid, reverse=reverse):
        lam = local_lambda(U[:, K], U[:, L], mix)
        F = lax_friedrichs_flux(U[:, K], U[:, L], n, lam, mix)
        out[:, K] -= area * F / grid.cell_volume
        out[:, L] += area * F / grid.cell_volume
    return out.reshape(field.data.shape)


def test_orientation_flip_gives_same_rhs():
    mix = GasMixture.from_gamma_r([1.4, 1.6], [1.0, 0.5])
    g = Grid.uniform(5, 2)
    rng = np.random.default_rng(0)
    rho = rng.uniform(0.5, 1.5, (2,) + g.cells)
    u = rng.uniform(-0.5, 0.5, (2,) + g.cells)
    p = rng.uniform(0.5, 1.5, g.cells)
    field = Field(g, primitive_to_conserved(rho, u, p, mix))
    a = _assemble(field, mix, False)
    b = _assemble(field, mix, True)
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-15 * np.abs(a).max())
    # and the vectorised right-hand side agrees with the face loop
    np.testing.assert_allclose(rhs(field, mix, SolverConfig()).data, a, atol=1e-13)


def test_discrete_divergence():
    g = Grid.uniform(8, 2)
    const = Field(g, np.ones((2,) + g.cells) * 3.0)
    assert np.abs(discrete_divergence(const).data).max() <= 1e-15
    x = g.centers()
    h = g.h[0]
    vec = Field(g, np.stack([np.sin(2 * np.pi * x[0]), np.zeros(g.cells)]))
    expected = (np.sin(2 * np.pi * (x[0] + h)) - np.sin(2 * np.pi * (x[0] - h))) / (2 * h)
    np.testing.assert_allclose(discrete_divergence(vec).data[0], expected, atol=1e-13)
    rng = np.random.default_rng(1)
    rand = Field(g, rng.normal(size=(2,) + g.cells))
    assert abs(discrete_divergence(rand).integral()[0]) < 1e-13


def test_neighbor_is_periodic():
    a = np.arange(4.0)[None]
    assert neighbor(a, 0).tolist() == [[1, 2, 3, 0]]
    assert neighbor(a, 0, -1).tolist() == [[3, 0, 1, 2]]


def test_prolong_injection():
    coarse = Grid.uniform(2, 2)
    fine = Grid.uniform(4, 2)
    f = Field(coarse, np.arange(4.0).reshape(1, 2, 2))
    p = prolong(f, fine)
    assert p.data[0, 0:2, 0:2].tolist() == [[0, 0], [0, 0]]
    assert p.data[0, 2, 3] == 3.0
    np.testing.assert_allclose(p.integral(), f.integral())
    with pytest.raises(ValueError):
        prolong(f, Grid.uniform(3, 2))


def test_snapshot_roundtrip(tmp_path):
    g = Grid((3, 2), ((0, 1), (-1, 2)))
    data = np.random.default_rng(2).normal(size=(3,) + g.cells)
    path = write_snapshot(tmp_path / "a.snap", Field(g, data), 0.125, ["a", "b", "c"])
    field, t, names = read_snapshot(path)
    assert t == 0.125 and names == ["a", "b", "c"]
    assert field.grid == g
    assert np.array_equal(field.data, data)
    raw = path.read_bytes()
    assert raw.endswith(np.ascontiguousarray(data, dtype="<f8").tobytes())


def test_field_csv():
    g = Grid.uniform(2, 2)
    f = Field(g, np.arange(8.0).reshape(2, 2, 2))
    lines = field_to_csv(f, ["u", "v"]).splitlines()
    assert lines[0] == "ix,iy,x_center,y_center,u,v"
    assert lines[1] == "0,0,0.25,0.25,0.0,4.0"
    assert len(lines) == 5


def test_project_is_linear():
    g = Grid.uniform(6, 2, -1, 1)
    f = lambda x: np.sin(np.pi * x[0]) * np.cos(x[1])
    h = lambda x: x[0] ** 3 - x[1]
    lhs = project(lambda x: 2.5 * f(x) - 0.7 * h(x), g).data
    rhs_ = 2.5 * project(f, g).data - 0.7 * project(h, g).data
    np.testing.assert_allclose(lhs, rhs_, rtol=0, atol=1e-14)
