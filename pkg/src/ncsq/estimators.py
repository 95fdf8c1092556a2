"""Estimator-style wrappers around the decomposition and the square function.

Inputs are arrays of shape ``(ncells, m, m)`` (or :class:`MatrixField`);
the depth ``J`` is inferred from ``ncells = 2**(d*J)``.
"""
import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils import check_random_state
from sklearn.utils.validation import check_is_fitted

from .cz import cz_decompose, default_lambda
from .field import MatrixField
from .grid import GridSpec
from .operators import SignSample, linearize


def check_matrix_field(X, d=1):
    """Validate ``X`` and return it as a :class:`MatrixField` on the inferred grid."""
    if isinstance(X, MatrixField):
        if X.grid.d != d:
            raise ValueError(f"field has dimension {X.grid.d}, estimator expects {d}")
        return X
    X = np.asarray(X)
    if X.ndim != 3 or X.shape[1] != X.shape[2]:
        raise ValueError(f"expected an array of shape (ncells, m, m), got {X.shape}")
    ncells = X.shape[0]
    J = int(round(np.log2(ncells) / d)) if ncells > 0 else 0
    if J < 1 or 2 ** (d * J) != ncells:
        raise ValueError(f"{ncells} cells is not 2**(d*J) for d={d} and some J >= 1")
    return MatrixField(GridSpec(d, J, X.shape[1]), X)


class CZDecomposition(TransformerMixin, BaseEstimator):
    """Calderón-Zygmund decomposition of a PSD matrix field.

    ``fit`` computes the stopping projections at level ``lam`` (the default
    level when ``None``); ``transform`` returns the stacked parts
    ``[g, b_d, b_off]`` with shape ``(3, ncells, m, m)``.
    """

    def __init__(self, lam=None, regularize=False, d=1):
        self.lam = lam
        self.regularize = regularize
        self.d = d

    def fit(self, X, y=None):
        f = check_matrix_field(X, self.d)
        self.lam_ = default_lambda(f) if self.lam is None else float(self.lam)
        self.parts_ = cz_decompose(f, self.lam_, regularize=self.regularize)
        self.grid_ = f.grid
        self.q_ = self.parts_.cuculescu.q
        self.p_ = self.parts_.cuculescu.p
        self.zeta_ = self.parts_.zeta.values
        return self

    def transform(self, X):
        check_is_fitted(self, "parts_")
        f = check_matrix_field(X, self.d)
        if f.grid != self.grid_:
            raise ValueError("transform expects a field on the fitted grid")
        if f is not self.parts_.f and not np.array_equal(f.values, self.parts_.f.values):
            parts = cz_decompose(f, self.lam_, regularize=self.regularize)
        else:
            parts = self.parts_
        return np.stack([parts.g.values, parts.b_d.values, parts.b_off.values])


class SquareFunction(TransformerMixin, BaseEstimator):
    """Linearized square function ``sum_k eps_k (M_k - E_k) F`` over sampled signs.

    ``signs='exhaustive'`` enumerates all sign patterns (``J <= 4``).
    ``transform`` returns shape ``(n_samples, ncells, m, m)``.
    """

    def __init__(self, n_samples=64, signs="random", random_state=None, d=1):
        self.n_samples = n_samples
        self.signs = signs
        self.random_state = random_state
        self.d = d

    def fit(self, X, y=None):
        f = check_matrix_field(X, self.d)
        if self.signs == "exhaustive":
            self.signs_ = SignSample.enumerate_all(f.grid.J)
        elif self.signs == "random":
            rng = check_random_state(self.random_state)
            signs = rng.choice(np.array([-1.0, 1.0]), size=(self.n_samples, f.grid.J + 1))
            self.signs_ = SignSample(signs, self.random_state)
        else:
            raise ValueError(f"signs must be 'random' or 'exhaustive', got {self.signs!r}")
        self.grid_ = f.grid
        return self

    def transform(self, X):
        check_is_fitted(self, "signs_")
        f = check_matrix_field(X, self.d)
        if f.grid != self.grid_:
            raise ValueError("transform expects a field on the fitted grid")
        return linearize(f, self.signs_).values
