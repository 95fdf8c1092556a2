"""Muckenhoupt weights on the dyadic grid.

Constants are computed over dyadic cubes of every generation ``0..J``; the
essential infimum over a cube is the minimum over its cells.
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .grid import cube_labels

DELTA_GRID = np.round(np.arange(1, 20) * 0.05, 2)


@dataclass(frozen=True)
class DeltaEstimate:
    """Empirical certificate ``w(S)/w(Q) <= C * (|S|/|Q|)**delta`` on sampled pairs."""

    delta: float
    C: float
    samples: int
    seed: int


class Weight:
    """Strictly positive scalar density on a grid, acting as ``w (x) I``."""

    def __init__(self, grid, values, kind="custom"):
        values = np.asarray(values, dtype=float).reshape(-1)
        if values.shape != (grid.ncells,):
            raise ValueError(f"weight needs {grid.ncells} values, got {values.shape}")
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            raise ValueError("weight must be finite and strictly positive")
        self.grid = grid
        self.values = values
        self.kind = kind
        self._ap = {}
        self._delta = {}

    @cached_property
    def a1(self):
        return a1_constant(self)

    def ap(self, p):
        if p not in self._ap:
            self._ap[p] = ap_constant(self, p)
        return self._ap[p]

    def delta(self, samples=1000, seed=0):
        key = (samples, seed)
        if key not in self._delta:
            self._delta[key] = estimate_delta(self, samples, seed)
        return self._delta[key]

    def total(self):
        return weighted_measure(self.grid.full(), self)

    def __repr__(self):
        return f"Weight({self.kind}, d={self.grid.d}, J={self.grid.J})"


def _values(w):
    return np.asarray(getattr(w, "values", w), dtype=float)


def _check_positive(values):
    if np.any(values <= 0) or not np.all(np.isfinite(values)):
        raise ValueError("weight must be finite and strictly positive")


def cube_stats(grid, values, k):
    """Per-cube (average, minimum) of cell values at generation ``k``."""
    labels = cube_labels(grid, k)
    ncubes = 2 ** (grid.d * k)
    size = grid.ncells // ncubes
    avg = np.bincount(labels, weights=values, minlength=ncubes) / size
    mins = np.full(ncubes, np.inf)
    np.minimum.at(mins, labels, values)
    return avg, mins


def a1_constant(w, grid=None):
    """``max_Q avg_Q(w) / min_Q(w)`` over all dyadic cubes."""
    grid = grid or w.grid
    values = _values(w)
    _check_positive(values)
    best = 1.0
    for k in range(grid.J + 1):
        avg, mins = cube_stats(grid, values, k)
        best = max(best, float(np.max(avg / mins)))
    return best


def ap_constant(w, p, grid=None):
    """``max_Q avg_Q(w) * avg_Q(w**(1/(1-p)))**(p-1)`` over all dyadic cubes, ``p > 1``."""
    if not p > 1:
        raise ValueError(f"A_p constant needs p > 1, got {p}")
    grid = grid or w.grid
    values = _values(w)
    _check_positive(values)
    dual = values ** (1.0 / (1.0 - p))
    best = 1.0
    for k in range(grid.J + 1):
        avg, _ = cube_stats(grid, values, k)
        avg_dual, _ = cube_stats(grid, dual, k)
        best = max(best, float(np.max(avg * avg_dual ** (p - 1))))
    return best


def weighted_measure(cells, w, grid=None):
    """``w(S)``: the integral of ``w`` over a cell set."""
    grid = grid or w.grid
    cells = np.asarray(cells, dtype=bool)
    return float(np.sum(_values(w)[cells]) * grid.cell_volume)


def _sample_pairs(grid, values, samples, rng):
    """Ratios ``(|S|/|Q|, w(S)/w(Q))`` for random ``S`` inside random dyadic ``Q``."""
    ratios = [(1.0, 1.0)]
    if grid.J == 0:
        return np.array(ratios)
    for _ in range(samples):
        k = int(rng.integers(0, grid.J))
        labels = cube_labels(grid, k)
        cube = int(rng.integers(0, 2 ** (grid.d * k)))
        members = np.flatnonzero(labels == cube)
        size = int(rng.integers(1, members.size + 1))
        chosen = rng.choice(members, size=size, replace=False)
        ratios.append((size / members.size, values[chosen].sum() / values[members].sum()))
    return np.array(ratios)


def delta_constants(pairs, deltas=DELTA_GRID):
    """Smallest admissible ``C`` for each ``delta`` on a set of sampled pairs."""
    r, wr = pairs[:, 0], pairs[:, 1]
    return np.array([np.max(wr / r**delta) for delta in deltas])


def estimate_delta(w, samples=1000, seed=0):
    """Empirical ``(delta, C(w))`` for the mass-concentration inequality.

    ``C(delta)`` grows with ``delta`` because the ratios ``|S|/|Q|`` are at
    most 1, so the smallest constant is reached at the bottom of the grid.
    The estimate keeps that smallest constant and returns the largest grid
    ``delta`` still attaining it.  This is a sampled certificate, not the
    analytic reverse-Hoelder exponent.
    """
    if samples < 100:
        raise ValueError("estimate_delta needs at least 100 samples")
    grid = w.grid
    values = _values(w)
    rng = np.random.default_rng(seed)
    pairs = _sample_pairs(grid, values, samples, rng)
    constants = delta_constants(pairs)
    floor = constants.min()
    admissible = np.flatnonzero(constants <= floor * (1 + 1e-12))
    i = int(admissible.max())
    return DeltaEstimate(float(DELTA_GRID[i]), float(constants[i]), samples, seed)


def delta_pass_rate(w, estimate, samples=1000, seed=1):
    """Fraction of freshly sampled pairs satisfying a previously estimated certificate."""
    rng = np.random.default_rng(seed)
    pairs = _sample_pairs(w.grid, _values(w), samples, rng)[1:]
    r, wr = pairs[:, 0], pairs[:, 1]
    ok = wr <= estimate.C * r**estimate.delta * (1 + 1e-12)
    return float(np.mean(ok))


def _periodic_distance(grid, x0):
    centers = (grid.coords() + 0.5) / grid.side
    x0 = np.broadcast_to(np.asarray(x0, dtype=float), (grid.d,))
    delta = np.abs(centers - x0) % 1.0
    delta = np.minimum(delta, 1.0 - delta)
    return np.sqrt(np.sum(delta**2, axis=1))


def _smooth_field(grid, rng, modes=6):
    """Random low-frequency trigonometric polynomial at cell centres, roughly unit scale."""
    centers = (grid.coords() + 0.5) / grid.side
    z = np.zeros(grid.ncells)
    for _ in range(modes):
        freq = rng.integers(-3, 4, size=grid.d)
        if not freq.any():
            freq[0] = 1
        amp = rng.normal() / np.sqrt(modes)
        phase = rng.uniform(0, 2 * np.pi)
        z += amp * np.cos(2 * np.pi * centers @ freq + phase)
    return z


def make_weight(grid, kind, **params):
    """Build a weight of one of the kinds ``constant``, ``two-level``, ``power``, ``random-A1``.

    ``random-A1`` draws ``exp(s * z)`` with ``z`` a random low-frequency
    trigonometric polynomial and ``s`` uniform in ``[0, log(cap)]``, and
    rejects draws whose dyadic A1 constant exceeds ``cap``.  The draws depend
    on ``seed`` and ``d`` only, so the same seed gives the same continuum
    weight at every depth ``J``.
    """
    if kind == "constant":
        c = float(params.get("c", 1.0))
        if c <= 0:
            raise ValueError("constant weight needs c > 0")
        return Weight(grid, np.full(grid.ncells, c), kind)
    if kind == "two-level":
        a, b = float(params.get("a", 2.0)), float(params.get("b", 1.0))
        if a <= 0 or b <= 0:
            raise ValueError("two-level weight needs a, b > 0")
        left = grid.coords()[:, 0] < grid.side // 2
        return Weight(grid, np.where(left, a, b), kind)
    if kind == "power":
        x0 = params.get("x0", 0.5)
        alpha = float(params.get("alpha", 0.5))
        if not 0 <= alpha < grid.d:
            raise ValueError(f"power weight needs 0 <= alpha < d = {grid.d}")
        dist = np.maximum(_periodic_distance(grid, x0), 2.0**-grid.J)
        return Weight(grid, dist**-alpha, kind)
    if kind == "random-A1":
        cap = float(params.get("cap", 4.0))
        seed = int(params.get("seed", 0))
        if cap < 1:
            raise ValueError("A1 constants are >= 1; cap must be >= 1")
        rng = np.random.default_rng([seed, grid.d, 0xA1])
        for _ in range(1000):
            s = np.log(cap) * rng.uniform()
            z = _smooth_field(grid, rng)
            values = np.exp(s * z)
            if a1_constant(values, grid) <= cap * (1 + 1e-12):
                return Weight(grid, values, kind)
        raise RuntimeError(f"no weight with A1 constant <= {cap} after 1000 draws")
    raise ValueError(f"unknown weight kind {kind!r}")


def parse_weight_spec(spec):
    """``"random-A1:cap=4"`` -> ``("random-A1", {"cap": 4.0})``."""
    kind, _, rest = spec.strip().partition(":")
    params = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, value = item.partition("=")
        if not eq:
            raise ValueError(f"bad weight parameter {item!r} in {spec!r}")
        params[key.strip()] = float(value)
    if kind not in ("constant", "two-level", "power", "random-A1"):
        raise ValueError(f"unknown weight kind {kind!r}")
    return kind, params
