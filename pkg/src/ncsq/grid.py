"""Periodic dyadic grid on the torus ``[0, 1)^d``.

Cells are the generation-``J`` dyadic cubes, indexed in row-major order.  A
set of cells is a boolean mask of length ``2**(d*J)``; all set algebra is
plain numpy boolean logic and therefore exact.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    """Dimension ``d``, dyadic depth ``J`` and matrix size ``m``."""

    d: int
    J: int
    m: int = 1

    def __post_init__(self):
        for name in ("d", "J", "m"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or value < 1:
                raise ValueError(f"GridSpec.{name} must be a positive integer, got {value!r}")

    @property
    def side(self):
        """Number of cells along one axis."""
        return 2**self.J

    @property
    def shape(self):
        return (self.side,) * self.d

    @property
    def ncells(self):
        return 2 ** (self.d * self.J)

    @property
    def cell_volume(self):
        return 2.0 ** (-self.d * self.J)

    def coords(self):
        """Integer multi-indices of all cells, shape ``(ncells, d)``."""
        return _coords(self)

    def check_generation(self, k):
        if not 0 <= k <= self.J:
            raise ValueError(f"generation {k} outside [0, {self.J}]")

    def empty(self):
        return np.zeros(self.ncells, dtype=bool)

    def full(self):
        return np.ones(self.ncells, dtype=bool)


@lru_cache(maxsize=None)
def _coords(grid):
    idx = np.indices(grid.shape).reshape(grid.d, -1).T
    idx.setflags(write=False)
    return idx


def ravel(grid, multi):
    multi = np.asarray(multi) % grid.side
    return np.ravel_multi_index(tuple(np.moveaxis(multi, -1, 0)), grid.shape)


def as_multi(grid, cell):
    """Multi-index of ``cell`` given either as a flat index or a tuple."""
    if np.ndim(cell) == 0:
        return grid.coords()[int(cell)]
    multi = np.asarray(cell, dtype=int)
    if multi.shape != (grid.d,):
        raise ValueError(f"cell multi-index must have length {grid.d}")
    return multi % grid.side


@dataclass(frozen=True)
class DyadicCube:
    """Dyadic cube of generation ``k`` with cube multi-index ``index``.

    Covers ``[index * 2**-k, (index + 1) * 2**-k)`` along every axis.
    """

    k: int
    index: tuple

    def side_cells(self, grid):
        return 2 ** (grid.J - self.k)

    def cells(self, grid):
        return cube_labels(grid, self.k) == ravel_cube(self.k, self.index, grid.d)


def ravel_cube(k, index, d):
    return int(np.ravel_multi_index(tuple(index), (2**k,) * d))


@lru_cache(maxsize=None)
def cube_labels(grid, k):
    """Flat label of the generation-``k`` cube containing each cell."""
    grid.check_generation(k)
    multi = grid.coords() >> (grid.J - k)
    labels = np.ravel_multi_index(tuple(multi.T), (2**k,) * grid.d)
    labels.setflags(write=False)
    return labels


def cubes(grid, k):
    """All ``2**(d*k)`` cubes of generation ``k``, in label order."""
    grid.check_generation(k)
    return [
        DyadicCube(k, tuple(int(i) for i in np.unravel_index(label, (2**k,) * grid.d)))
        for label in range(2 ** (grid.d * k))
    ]


def cube_masks(grid, k):
    """Boolean matrix ``(ncubes, ncells)``; row ``i`` is the ``i``-th cube."""
    labels = cube_labels(grid, k)
    return labels[None, :] == np.arange(2 ** (grid.d * k))[:, None]


def shift(grid, cells, t):
    """Periodic translate of a cell set by the cell offset ``t``."""
    t = as_multi(grid, t) if np.ndim(t) == 0 else np.asarray(t, dtype=int)
    moved = np.roll(np.asarray(cells).reshape(grid.shape), tuple(t), axis=tuple(range(grid.d)))
    return moved.reshape(-1)


@lru_cache(maxsize=None)
def _ball_at_origin(grid, k):
    grid.check_generation(k)
    delta = grid.coords()
    delta = np.minimum(delta, grid.side - delta)
    radius = 2 ** (grid.J - k)
    mask = np.sum(delta.astype(np.int64) ** 2, axis=1) <= radius * radius
    mask.setflags(write=False)
    return mask


def ball(grid, center, k):
    """Cells whose centres lie within periodic distance ``2**-k`` of ``center``'s centre."""
    return shift(grid, _ball_at_origin(grid, k), as_multi(grid, center))


def ball_size(grid, k):
    return int(np.count_nonzero(_ball_at_origin(grid, k)))


def discrete_boundary(grid, cells):
    """Cells of the set having a face neighbour outside it."""
    cells = np.asarray(cells, dtype=bool)
    body = cells.reshape(grid.shape)
    outside = np.zeros(grid.shape, dtype=bool)
    for axis in range(grid.d):
        for step in (1, -1):
            outside |= ~np.roll(body, step, axis=axis)
    return (body & outside).reshape(-1)


def q_boundary(grid, cells, n):
    """Union of generation-``n`` cubes meeting the set without being contained in it."""
    cells = np.asarray(cells, dtype=bool)
    labels = cube_labels(grid, n)
    ncubes = 2 ** (grid.d * n)
    hits = np.bincount(labels, weights=cells, minlength=ncubes)
    sizes = np.bincount(labels, minlength=ncubes)
    straddling = (hits > 0) & (hits < sizes)
    return straddling[labels]


@lru_cache(maxsize=None)
def _translate_table(grid):
    """``table[y, c]`` is the cell reached from ``c`` by the offset of cell ``y``."""
    coords = grid.coords()
    table = ravel(grid, coords[:, None, :] + coords[None, :, :])
    table.setflags(write=False)
    return table


def k_boundary(grid, cells, kernel):
    """Union of all periodic translates ``kernel + y`` meeting both the set and its complement."""
    kernel = np.asarray(kernel, dtype=bool)
    if not kernel.any():
        raise ValueError("k_boundary needs a nonempty kernel set")
    cells = np.asarray(cells, dtype=bool)
    members = np.flatnonzero(kernel)
    translates = _translate_table(grid)[:, members]
    inside = cells[translates]
    selected = inside.any(axis=1) & (~inside).any(axis=1)
    out = grid.empty()
    out[translates[selected].reshape(-1)] = True
    return out


def annulus_of(grid, region, n):
    """``Q ∩ region`` over generation-``n`` cubes ``Q`` meeting the discrete boundary of ``region``."""
    region = np.asarray(region, dtype=bool)
    labels = cube_labels(grid, n)
    edge = discrete_boundary(grid, region)
    touched = np.zeros(2 ** (grid.d * n), dtype=bool)
    touched[labels[edge]] = True
    return touched[labels] & region


def annulus(grid, center, k, n):
    """Boundary strip of the ball of radius ``2**-k`` around ``center`` at resolution ``n``."""
    if not k < n:
        raise ValueError(f"annulus needs k < n, got k={k}, n={n}")
    grid.check_generation(n)
    return annulus_of(grid, ball(grid, center, k), n)


@lru_cache(maxsize=None)
def annulus_table(grid, k, n):
    """Boolean matrix ``(ncells, ncells)``; row ``x`` is ``annulus(x, k, n)``."""
    table = np.stack([annulus(grid, x, k, n) for x in range(grid.ncells)])
    table.setflags(write=False)
    return table


def j_set(grid, y, k, n):
    """Centres ``x`` whose annulus at scales ``(k, n)`` contains cell ``y``."""
    if not k < n:
        raise ValueError(f"j_set needs k < n, got k={k}, n={n}")
    y = int(ravel(grid, as_multi(grid, y)))
    return annulus_table(grid, k, n)[:, y].copy()


def dilate(grid, cube, factor=5):
    """Concentric cube ``factor`` times larger, wrapped periodically and capped at the torus."""
    if factor < 1 or factor % 2 == 0:
        raise ValueError("dilation factor must be an odd integer >= 1")
    s = cube.side_cells(grid)
    if factor * s >= grid.side:
        return grid.full()
    reach = (factor - 1) // 2 * s
    per_axis = []
    for i in cube.index:
        axis = np.zeros(grid.side, dtype=bool)
        axis[np.arange(i * s - reach, (i + 1) * s + reach) % grid.side] = True
        per_axis.append(axis)
    mask = per_axis[0]
    for axis in per_axis[1:]:
        mask = np.logical_and.outer(mask, axis)
    return mask.reshape(-1)


@lru_cache(maxsize=None)
def dilation_masks(grid, k, factor=5):
    """Boolean matrix ``(ncubes, ncells)`` of dilated generation-``k`` cubes."""
    masks = np.stack([dilate(grid, q, factor) for q in cubes(grid, k)])
    masks.setflags(write=False)
    return masks


def measure(grid, cells):
    """Lebesgue measure of a cell set."""
    return np.count_nonzero(cells) * grid.cell_volume
