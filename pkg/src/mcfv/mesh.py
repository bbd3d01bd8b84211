"""Periodic uniform Cartesian grids and cell fields.

Cells are indexed row-major over ``grid.cells``; field payloads keep their
component axis first, so a field of conserved states has shape
``(nvar, *grid.cells)``.  Neighbours are found by periodic wrap; there are no
ghost layers.
"""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterator, Sequence

import numpy as np


@dataclass(frozen=True)
class Grid:
    cells: tuple[int, ...]
    box: tuple[tuple[float, float], ...]

    def __post_init__(self):
        cells = tuple(int(c) for c in self.cells)
        box = tuple((float(lo), float(hi)) for lo, hi in self.box)
        if not 1 <= len(cells) <= 3:
            raise ValueError("grids are 1, 2 or 3 dimensional")
        if len(box) != len(cells):
            raise ValueError("box and cells must have the same dimension")
        if any(c < 1 for c in cells):
            raise ValueError("cell counts must be positive")
        if any(hi <= lo for lo, hi in box):
            raise ValueError("box bounds must satisfy hi > lo")
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "box", box)

    @classmethod
    def uniform(cls, n: int, dim: int, lo: float = 0.0, hi: float = 1.0) -> "Grid":
        return cls((n,) * dim, ((lo, hi),) * dim)

    @property
    def dim(self) -> int:
        return len(self.cells)

    @property
    def h(self) -> tuple[float, ...]:
        return tuple((hi - lo) / n for (lo, hi), n in zip(self.box, self.cells))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.h))

    def face_area(self, d: int) -> float:
        """Measure of a face normal to axis ``d``."""
        return self.cell_volume / self.h[d]

    @property
    def ncells(self) -> int:
        return int(np.prod(self.cells))

    def centers(self) -> np.ndarray:
        """Cell-centre coordinates, shape ``(dim, *cells)``."""
        axes = [lo + (np.arange(n) + 0.5) * h
                for (lo, _), n, h in zip(self.box, self.cells, self.h)]
        return np.stack(np.meshgrid(*axes, indexing="ij"))

    def unravel(self, flat: int) -> tuple[int, ...]:
        return tuple(int(i) for i in np.unravel_index(flat, self.cells))

    def ravel(self, index: Sequence[int]) -> int:
        wrapped = tuple(int(i) % n for i, n in zip(index, self.cells))
        return int(np.ravel_multi_index(wrapped, self.cells))

    def is_refinement_of(self, coarse: "Grid") -> bool:
        return (self.box == coarse.box
                and all(f % c == 0 for f, c in zip(self.cells, coarse.cells)))

    def describe(self) -> dict:
        return {"dim": self.dim, "cells": list(self.cells), "box": [list(b) for b in self.box]}


@dataclass
class Field:
    grid: Grid
    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        if self.data.shape[1:] != self.grid.cells:
            raise ValueError(f"payload shape {self.data.shape} does not match "
                             f"grid cells {self.grid.cells}")

    def copy(self) -> "Field":
        return Field(self.grid, self.data.copy())

    def cell(self, index) -> np.ndarray:
        return self.data[(slice(None),) + tuple(index)]

    def integral(self) -> np.ndarray:
        """``sum_K |K| U_K`` per component."""
        axes = tuple(range(1, self.data.ndim))
        return self.grid.cell_volume * self.data.sum(axis=axes)

    def shifted(self, shift: Sequence[int]) -> "Field":
        axes = tuple(range(1, self.grid.dim + 1))
        return Field(self.grid, np.roll(self.data, tuple(shift), axis=axes))


def neighbor(a: np.ndarray, d: int, offset: int = 1) -> np.ndarray:
    """Values of the periodic neighbour ``K + offset*e_d`` at every cell ``K``.

    ``a`` has a leading component axis.
    """
    return np.roll(a, -offset, axis=1 + d)


def gauss_points(order: int):
    return np.polynomial.legendre.leggauss(order)


def project(f: Callable[[np.ndarray], np.ndarray], grid: Grid,
            quadrature_order: int = 3) -> Field:
    """Cell averages of ``f`` by tensor-product Gauss quadrature.

    ``f`` receives coordinates of shape ``(dim, *cells)`` and returns either an
    array of shape ``cells`` or ``(ncomp, *cells)``.
    """
    nodes, weights = gauss_points(quadrature_order)
    xc = grid.centers()
    h = np.array(grid.h).reshape((grid.dim,) + (1,) * grid.dim)
    weights = weights / weights.sum()
    # accumulate deviations from the first node so constants come out exact
    ref = total = None
    for combo in itertools.product(range(quadrature_order), repeat=grid.dim):
        shift = np.array([nodes[k] for k in combo]).reshape(h.shape)
        w = np.prod([weights[k] for k in combo])
        val = np.asarray(f(xc + 0.5 * h * shift), dtype=float)
        if ref is None:
            ref, total = val, np.zeros_like(val)
        total += w * (val - ref)
    total = ref + total
    if total.ndim == grid.dim:
        total = total[None]
    return Field(grid, total)


def interfaces(grid: Grid, reverse: bool = False) -> Iterator[tuple[int, int, np.ndarray, float]]:
    """Every face once, as ``(K, L, n_KL, |S_KL|)`` with flat cell indices.

    By default the normal points from a cell to its ``+e_d`` neighbour; with
    ``reverse`` the pair is swapped and the normal negated.
    """
    for d in range(grid.dim):
        n = np.zeros(grid.dim)
        n[d] = 1.0
        area = grid.face_area(d)
        for flat in range(grid.ncells):
            idx = list(grid.unravel(flat))
            idx[d] += 1
            K, L = flat, grid.ravel(idx)
            if reverse:
                yield L, K, -n, area
            else:
                yield K, L, n.copy(), area


def discrete_divergence(g: Field) -> Field:
    """Face-averaged discrete divergence of a vector field ``(dim, *cells)``."""
    grid = g.grid
    out = np.zeros(grid.cells)
    for d in range(grid.dim):
        gd = g.data[d:d + 1]
        out += (neighbor(gd, d, 1) - neighbor(gd, d, -1))[0] / (2.0 * grid.h[d])
    return Field(grid, out[None])


def prolong(field: Field, fine: Grid) -> Field:
    """Piecewise-constant injection onto a nested finer grid."""
    if not fine.is_refinement_of(field.grid):
        raise ValueError("target grid is not a refinement of the source grid")
    data = field.data
    for d, (f, c) in enumerate(zip(fine.cells, field.grid.cells)):
        data = np.repeat(data, f // c, axis=1 + d)
    return Field(fine, data)


# snapshot files: text header, blank-free "key: value" lines, terminated by
# END_HEADER, then little-endian float64 payload (component-major, row-major cells)

def write_snapshot(path, field: Field, time: float, names: Sequence[str]) -> Path:
    path = Path(path)
    if len(names) != field.data.shape[0]:
        raise ValueError("one name per component is required")
    header = (f"dim: {field.grid.dim}\n"
              f"cells: {' '.join(map(str, field.grid.cells))}\n"
              f"box: {' '.join(f'{lo!r} {hi!r}' for lo, hi in field.grid.box)}\n"
              f"time: {time!r}\n"
              f"variables: {' '.join(names)}\n"
              "END_HEADER\n")
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(np.ascontiguousarray(field.data, dtype="<f8").tobytes())
    return path


def read_snapshot(path):
    """Returns ``(field, time, names)``."""
    raw = Path(path).read_bytes()
    marker = b"END_HEADER\n"
    cut = raw.index(marker) + len(marker)
    meta = {}
    for line in raw[:cut - len(marker)].decode("ascii").splitlines():
        key, _, value = line.partition(":")
        meta[key.strip()] = value.split()
    cells = tuple(int(c) for c in meta["cells"])
    b = [float(v) for v in meta["box"]]
    grid = Grid(cells, tuple(zip(b[0::2], b[1::2])))
    names = meta["variables"]
    data = np.frombuffer(raw[cut:], dtype="<f8").reshape((len(names),) + cells)
    return Field(grid, data.astype(float)), float(meta["time"][0]), names


def field_to_csv(field: Field, names: Sequence[str], path=None) -> str:
    """One row per cell: index tuple, centre coordinates, all variables."""
    grid = field.grid
    xc = grid.centers().reshape(grid.dim, -1)
    vals = field.data.reshape(field.data.shape[0], -1)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    axes = "xyz"[:grid.dim]
    w.writerow([f"i{a}" for a in axes] + [f"{a}_center" for a in axes] + list(names))
    for flat in range(grid.ncells):
        w.writerow(list(grid.unravel(flat)) + [repr(float(v)) for v in xc[:, flat]]
                   + [repr(float(v)) for v in vals[:, flat]])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text
