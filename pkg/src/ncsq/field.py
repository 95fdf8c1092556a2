"""Matrix-valued functions on the dyadic grid and their traces and norms.

A :class:`MatrixField` stores one ``m x m`` complex matrix per cell, and
optionally a leading axis of ``R`` Rademacher samples.  Traces integrate the
matrix trace against the cell volume (and a weight); a sample axis is
averaged with probability ``1/R`` per sample.
"""
import numpy as np

from . import linalg
from ._config import DEFAULT


class MatrixField:
    """Per-cell matrices on a :class:`GridSpec`.

    ``values`` has shape ``(ncells, m, m)`` or, with a sample axis,
    ``(R, ncells, m, m)``.
    """

    __array_priority__ = 100

    def __init__(self, grid, values):
        values = np.asarray(values, dtype=complex)
        cell_shape = (grid.ncells, grid.m, grid.m)
        if values.shape[-3:] != cell_shape or values.ndim not in (3, 4):
            raise ValueError(f"values of shape {values.shape} do not fit grid {cell_shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("matrix field has non-finite entries")
        self.grid = grid
        self.values = values

    @classmethod
    def zeros(cls, grid, samples=None):
        shape = (grid.ncells, grid.m, grid.m)
        if samples is not None:
            shape = (samples,) + shape
        return cls(grid, np.zeros(shape, dtype=complex))

    @classmethod
    def identity(cls, grid):
        return cls.constant(grid, np.eye(grid.m))

    @classmethod
    def constant(cls, grid, matrix):
        matrix = np.asarray(matrix, dtype=complex).reshape(grid.m, grid.m)
        return cls(grid, np.broadcast_to(matrix, (grid.ncells, grid.m, grid.m)).copy())

    @classmethod
    def from_scalar(cls, grid, scalars):
        """Scalar field ``s(x) * I``."""
        scalars = np.asarray(scalars, dtype=complex).reshape(-1)
        return cls(grid, scalars[:, None, None] * np.eye(grid.m))

    @property
    def samples(self):
        """Size of the Rademacher axis, or ``None``."""
        return self.values.shape[0] if self.values.ndim == 4 else None

    def adjoint(self):
        return MatrixField(self.grid, linalg.adjoint(self.values))

    def copy(self):
        return MatrixField(self.grid, self.values.copy())

    def _coerce(self, other):
        if isinstance(other, MatrixField):
            if other.grid != self.grid:
                raise ValueError("fields live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return MatrixField(self.grid, self.values + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return MatrixField(self.grid, self.values - self._coerce(other))

    def __rsub__(self, other):
        return MatrixField(self.grid, self._coerce(other) - self.values)

    def __neg__(self):
        return MatrixField(self.grid, -self.values)

    def __mul__(self, scalar):
        if isinstance(scalar, MatrixField):
            raise TypeError("use @ for the cellwise matrix product")
        return MatrixField(self.grid, self.values * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return MatrixField(self.grid, self.values / scalar)

    def __matmul__(self, other):
        return MatrixField(self.grid, self.values @ self._coerce(other))

    def __rmatmul__(self, other):
        return MatrixField(self.grid, self._coerce(other) @ self.values)

    def restrict(self, cells):
        """Multiply by the indicator of a cell set."""
        mask = np.asarray(cells, dtype=bool)
        return MatrixField(self.grid, self.values * mask[:, None, None])

    def is_hermitian(self, tol=DEFAULT.identity):
        skew = np.abs(self.values - linalg.adjoint(self.values)).max(initial=0.0)
        return skew <= tol * max(1.0, np.abs(self.values).max(initial=0.0))

    def is_psd(self, tol=DEFAULT.psd):
        if not self.is_hermitian():
            return False
        scale = max(1.0, np.abs(self.values).max(initial=0.0))
        return bool(np.all(linalg.min_eig(self.values) >= -tol * scale))

    def max_abs(self):
        return float(np.abs(self.values).max(initial=0.0))

    def __repr__(self):
        extra = f", samples={self.samples}" if self.samples else ""
        return f"MatrixField(d={self.grid.d}, J={self.grid.J}, m={self.grid.m}{extra})"


def _cell_weights(F, w):
    """Per-cell measure ``2**(-dJ) * w(cell)``, broadcast against a sample axis."""
    grid = F.grid
    if w is None:
        weights = np.full(grid.ncells, grid.cell_volume)
    else:
        values = getattr(w, "values", w)
        values = np.asarray(values, dtype=float)
        if values.shape != (grid.ncells,):
            raise ValueError(f"weight has shape {values.shape}, field has {grid.ncells} cells")
        weights = grid.cell_volume * values
    return weights


def _reduce(F, per_cell, w):
    """Weighted sum over cells, averaged over the sample axis if present."""
    weights = _cell_weights(F, w)
    if F.samples is None:
        return np.sum(per_cell * weights)
    return np.sum(per_cell * weights[None, :]) / F.samples


def trace(F, w=None):
    """``phi_w(F)``: integral of the matrix trace against ``w dx`` (sample axis averaged)."""
    diag = np.trace(F.values, axis1=-2, axis2=-1)
    return complex(_reduce(F, diag, w))


def singular_values(F):
    return linalg.singular_values(F.values)


def lp_norm(F, p, w=None):
    """``||F||_{p,w} = phi_w(|F|^p)^(1/p)``; ``p = inf`` is the max cellwise operator norm."""
    if not p >= 1:
        raise ValueError(f"lp_norm needs 1 <= p <= inf, got {p}")
    s = singular_values(F)
    if np.isinf(p):
        return float(s[..., -1].max(initial=0.0))
    return float(_reduce(F, np.sum(s**p, axis=-1), w) ** (1.0 / p))


def distribution(F, lam, w=None, sv=None):
    """``phi_w(chi_(lam, inf)(|F|))``: weighted count of singular values above ``lam``."""
    if not lam > 0:
        raise ValueError("distribution needs lam > 0")
    s = singular_values(F) if sv is None else sv
    return float(_reduce(F, np.count_nonzero(s > lam, axis=-1), w))


def _flat_sv_mass(F, w, sv=None):
    s = singular_values(F) if sv is None else sv
    weights = _cell_weights(F, w)
    if F.samples is not None:
        weights = np.broadcast_to(weights / F.samples, s.shape[:-1])
    mass = np.broadcast_to(weights[..., None], s.shape)
    return s.reshape(-1), mass.reshape(-1)


def weak_l1_quasinorm(F, w=None, sv=None):
    """``sup_lam lam * distribution(F, lam, w)``.

    ``lam -> lam * distribution(lam)`` increases linearly between consecutive
    singular values, so the supremum is the left limit at a singular value
    ``s``, namely ``s * mass{sigma >= s}``.
    """
    s, mass = _flat_sv_mass(F, w, sv)
    keep = s > 0
    s, mass = s[keep], mass[keep]
    if s.size == 0:
        return 0.0
    order = np.argsort(-s, kind="stable")
    s, mass = s[order], mass[order]
    cum = np.cumsum(mass)
    # last index of each tie group in the descending order
    last = np.r_[s[1:] != s[:-1], True]
    return float(np.max(s[last] * cum[last]))


def inner(F, G, w=None):
    """``phi_w(F G*)``."""
    return trace(F @ G.adjoint(), w)
