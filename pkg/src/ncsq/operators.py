"""Averaging operators on matrix fields.

Every operator here acts on the cell variable only (``A (x) I_M``), so it is
stored as a real ``ncells x ncells`` matrix and applied to all matrix
entries (and all Rademacher samples) at once.
"""
from dataclasses import dataclass
from functools import lru_cache
import itertools

import numpy as np

from .field import MatrixField
from .grid import annulus_table, ball, ball_size, cube_labels


@lru_cache(maxsize=None)
def cond_exp_matrix(grid, k):
    grid.check_generation(k)
    labels = cube_labels(grid, k)
    same = labels[:, None] == labels[None, :]
    out = same / (grid.ncells // 2 ** (grid.d * k))
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def ball_matrix(grid, k):
    grid.check_generation(k)
    rows = np.stack([ball(grid, x, k) for x in range(grid.ncells)])
    out = rows / ball_size(grid, k)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def truncated_matrix(grid, k, n):
    if not k < n:
        raise ValueError(f"truncated average needs k < n, got k={k}, n={n}")
    out = annulus_table(grid, k, n) / ball_size(grid, k)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def difference_matrix(grid, k):
    out = ball_matrix(grid, k) - cond_exp_matrix(grid, k)
    out.setflags(write=False)
    return out


def apply_cell_operator(matrix, F):
    """``(A F)(x) = sum_y A[x, y] F(y)`` for each sample and matrix entry."""
    v = F.values
    flat = v.reshape(v.shape[:-2] + (-1,))
    out = np.matmul(matrix, flat)
    return MatrixField(F.grid, out.reshape(v.shape))


def cond_exp(F, k):
    """Average over each generation-``k`` dyadic cube."""
    return apply_cell_operator(cond_exp_matrix(F.grid, k), F)


def ball_avg(F, k):
    """Average over the periodic ball of radius ``2**-k`` around each cell."""
    return apply_cell_operator(ball_matrix(F.grid, k), F)


def truncated_avg(F, k, n):
    """Ball-normalised integral of ``F`` over the boundary strip ``annulus(x, k, n)``."""
    return apply_cell_operator(truncated_matrix(F.grid, k, n), F)


def t_op(F, k):
    """Difference of ball average and conditional expectation at scale ``k``."""
    return apply_cell_operator(difference_matrix(F.grid, k), F)


@dataclass(frozen=True)
class SignSample:
    """``R x (J+1)`` Rademacher signs; row ``s`` is one sample ``(eps_0, ..., eps_J)``."""

    signs: np.ndarray
    seed: object = None
    exhaustive: bool = False

    def __post_init__(self):
        signs = np.asarray(self.signs)
        if signs.ndim != 2 or not np.all(np.abs(signs) == 1):
            raise ValueError("signs must be a 2-d array of +-1 entries")

    @classmethod
    def random(cls, R, J, seed=0):
        rng = np.random.default_rng(seed)
        signs = rng.choice(np.array([-1.0, 1.0]), size=(R, J + 1))
        return cls(signs, seed)

    @classmethod
    def enumerate_all(cls, J):
        """All ``2**(J+1)`` sign patterns; expectations over them are exact."""
        if J > 4:
            raise ValueError("exhaustive sign enumeration is limited to J <= 4")
        signs = np.array(list(itertools.product((-1.0, 1.0), repeat=J + 1)))
        return cls(signs, None, True)

    @property
    def R(self):
        return self.signs.shape[0]

    @property
    def J(self):
        return self.signs.shape[1] - 1


def linearized_matrices(grid, signs):
    """``L_s = sum_k eps_k(s) (M_k - E_k)`` as an ``(R, ncells, ncells)`` stack."""
    if signs.J != grid.J:
        raise ValueError(f"signs cover scales 0..{signs.J}, grid needs 0..{grid.J}")
    diffs = np.stack([difference_matrix(grid, k) for k in range(grid.J + 1)])
    return np.einsum("sk,kxy->sxy", signs.signs, diffs)


def linearize(F, signs):
    """``(T F)(s, x) = sum_k eps_k(s) T_k F(x)``, a field with a sample axis."""
    if F.samples is not None:
        raise ValueError("linearize expects a field without a sample axis")
    L = linearized_matrices(F.grid, signs)
    flat = F.values.reshape(F.grid.ncells, -1)
    out = np.matmul(L, flat[None])
    return MatrixField(F.grid, out.reshape((signs.R,) + F.values.shape))


def linearize_adjoint(G, signs):
    """Adjoint of :func:`linearize` for the unweighted pairings: ``(1/R) sum_s L_s^T G_s``."""
    if G.samples != signs.R:
        raise ValueError("sample axis does not match the sign sample")
    L = linearized_matrices(G.grid, signs)
    flat = G.values.reshape(signs.R, G.grid.ncells, -1)
    out = np.matmul(np.swapaxes(L, 1, 2), flat).mean(axis=0)
    return MatrixField(G.grid, out.reshape(G.values.shape[1:]))


def square_function_terms(F):
    """``[T_0 F, ..., T_J F]``."""
    return [t_op(F, k) for k in range(F.grid.J + 1)]
