"""Seeded random instances: a PSD matrix field and a weight.

The field is a continuum model sampled at cell centres: a constant positive
background plus a few Gaussian bumps, each carrying a random low-rank PSD
matrix.  The random draws depend on ``(seed, d, m)`` only, so one seed gives
the same continuum instance at every depth ``J``; this is what makes
refinement comparisons between ``J`` and ``J + 1`` meaningful.
"""
import numpy as np

from .field import MatrixField
from .io import Instance
from .weights import make_weight, parse_weight_spec

BUMPS = 4


def _periodic_sq_distance(points, center):
    delta = np.abs(points - center) % 1.0
    delta = np.minimum(delta, 1.0 - delta)
    return np.sum(delta**2, axis=-1)


def _random_psd(rng, m, rank):
    v = rng.normal(size=(m, rank)) + 1j * rng.normal(size=(m, rank))
    p = v @ v.conj().T
    return p / np.trace(p).real


def random_field(grid, seed, bumps=BUMPS):
    """Background ``B B*/m + 0.1`` plus ``bumps`` Gaussian bumps of log-uniform height in ``[2, 30]``."""
    m = grid.m
    rng = np.random.default_rng([seed, grid.d, m, 0xF1E1D])
    b = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    base = b @ b.conj().T / m + 0.1 * np.eye(m)
    centers = (grid.coords() + 0.5) / grid.side
    values = np.broadcast_to(base, (grid.ncells, m, m)).astype(complex)
    for _ in range(bumps):
        c = rng.uniform(size=grid.d)
        height = np.exp(rng.uniform(np.log(2.0), np.log(30.0)))
        width = rng.uniform(0.02, 0.15)
        rank = int(rng.integers(1, min(m, 2) + 1))
        profile = height * np.exp(-_periodic_sq_distance(centers, c) / (2 * width**2))
        values = values + profile[:, None, None] * _random_psd(rng, m, rank)
    values = 0.5 * (values + np.conj(np.swapaxes(values, -1, -2)))
    return MatrixField(grid, values)


def generate(grid, seed, weight="random-A1:cap=4"):
    """Instance with a random field and a weight built from a spec string such as ``"power:alpha=0.5"``."""
    kind, params = parse_weight_spec(weight) if isinstance(weight, str) else weight
    params = dict(params)
    if kind == "random-A1":
        params.setdefault("seed", seed)
    w = make_weight(grid, kind, **params)
    return Instance(random_field(grid, seed), w, None, seed)


def trivial(grid, level=1.0):
    """Constant field ``level * I`` with the unit weight; no stopping for any ``lam >= level``."""
    field = MatrixField.identity(grid) * level
    return Instance(field, make_weight(grid, "constant"), None, 0)
