"""Cuculescu projections, the Calderón-Zygmund decomposition and the projection zeta."""
from dataclasses import dataclass

import numpy as np

from . import linalg
from ._config import DEFAULT
from .field import MatrixField, lp_norm, trace
from .grid import cube_labels, dilation_masks
from .operators import cond_exp
from .report import inequality


class NormalizationError(ValueError):
    """The root average of ``f`` exceeds ``lam``, so stopping cannot start at generation 0."""

    def __init__(self, lam, excess, cell=0):
        self.lam = lam
        self.excess = excess
        self.cell = cell
        super().__init__(
            f"E_0(f) <= lam * 1 fails at cell {cell}: largest eigenvalue of "
            f"E_0(f) - lam exceeds 0 by {excess:.3e} (lam={lam!r})"
        )


@dataclass
class CuculescuResult:
    """Stopping projections at level ``lam``.

    ``q[n]`` for ``n = 0..J`` (``q[0]`` is the identity), ``p[n] = q[n-1] - q[n]``
    with ``p[0] = 0``, and ``q_final = q[J]`` (the infimum of a finite
    decreasing sequence).  Arrays have shape ``(J+1, ncells, m, m)``.
    """

    grid: object
    lam: float
    q: np.ndarray
    p: np.ndarray
    f: MatrixField

    @property
    def q_final(self):
        return self.q[-1]

    def q_field(self, n):
        return MatrixField(self.grid, self.q[n])

    def p_field(self, n):
        return MatrixField(self.grid, self.p[n])

    def stopped(self, n):
        """Mask of generation-``n`` cubes (as cells) where ``p_n`` is nonzero."""
        return np.real(np.trace(self.p[n], axis1=-2, axis2=-1)) > 0.5


def default_lambda(f):
    """``max(median cellwise trace / m, ||E_0 f||)``.

    The median keeps stopping nondegenerate; the second term guarantees the
    root normalisation ``E_0 f <= lam``.
    """
    m = f.grid.m
    tr = np.real(np.trace(f.values, axis1=-2, axis2=-1))
    root = linalg.operator_norm(cond_exp(f, 0).values[0])
    return float(max(np.median(tr) / m, root))


def _check_input(f, lam, tol):
    if f.samples is not None:
        raise ValueError("Cuculescu construction expects a field without a sample axis")
    if not lam > 0:
        raise ValueError("lam must be positive")
    if not f.is_psd(tol.psd):
        bad = int(np.argmin(linalg.min_eig(0.5 * (f.values + linalg.adjoint(f.values)))))
        raise ValueError(f"f is not positive semidefinite (cell {bad})")
    root = cond_exp(f, 0).values[0]
    excess = float(linalg.eigvalsh(root)[-1] - lam)
    if excess > tol.psd * max(1.0, lam):
        raise NormalizationError(lam, excess, 0)


def cuculescu(f, lam, regularize=False, tol=DEFAULT):
    """Decreasing projections ``q_n = chi_(0,lam](q_{n-1} E_n(f) q_{n-1})``.

    The spectral projection is taken inside the range of ``q_{n-1}``, which
    keeps ``q_n <= q_{n-1}`` even when ``f`` has a kernel.  For strictly
    positive ``f`` this is the same projection; ``regularize=True`` adds
    ``1e-10 * lam`` times the identity to make ``f`` strictly positive.
    """
    _check_input(f, lam, tol)
    if regularize:
        f = f + 1e-10 * lam * np.eye(f.grid.m)
    grid = f.grid
    eye = np.eye(grid.m)
    q = np.empty((grid.J + 1, grid.ncells, grid.m, grid.m), dtype=complex)
    q[0] = eye
    # push the complement of q_{n-1} above lam so it is never selected
    lift = 2.0 * lam + 1.0
    for n in range(1, grid.J + 1):
        fn = cond_exp(f, n).values
        a = q[n - 1] @ fn @ q[n - 1] + lift * (eye - q[n - 1])
        q[n] = linalg.spectral_projection(a, "[0,lam]", lam, tol)
    p = np.zeros_like(q)
    p[1:] = q[:-1] - q[1:]
    return CuculescuResult(grid, float(lam), q, p, f)


def literal_projections(f, lam, tol=DEFAULT):
    """``chi_(0,lam]`` applied verbatim (no range restriction); reference for strictly positive ``f``."""
    _check_input(f, lam, tol)
    grid = f.grid
    q = [np.broadcast_to(np.eye(grid.m), (grid.ncells, grid.m, grid.m)).astype(complex)]
    for n in range(1, grid.J + 1):
        fn = cond_exp(f, n).values
        q.append(linalg.spectral_projection(q[-1] @ fn @ q[-1], "(0,lam]", lam, tol))
    return np.stack(q)


@dataclass
class CZParts:
    """``f = g + b_d + b_off`` together with the per-generation pieces and ``zeta``.

    ``bd[n] = p_n (f - f_n) p_n`` and ``boff[n] = p_n (f - f_n) q_n + q_n (f - f_n) p_n``
    for ``n = 1..J``; index 0 holds zero fields.
    """

    f: MatrixField
    cuculescu: CuculescuResult
    g: MatrixField
    b_d: MatrixField
    b_off: MatrixField
    bd: list
    boff: list
    zeta: MatrixField

    @property
    def lam(self):
        return self.cuculescu.lam

    @property
    def grid(self):
        return self.f.grid


def cz_decompose(f, lam, regularize=False, tol=DEFAULT):
    """Noncommutative Calderón-Zygmund decomposition at level ``lam``."""
    res = cuculescu(f, lam, regularize, tol)
    grid = f.grid
    fv = f.values
    q, p = res.q, res.p
    g = q[-1] @ fv @ q[-1]
    zero = MatrixField.zeros(grid)
    bd, boff = [zero], [zero]
    for n in range(1, grid.J + 1):
        fn = cond_exp(f, n).values
        g = g + p[n] @ fn @ p[n]
        diff = fv - fn
        bd.append(MatrixField(grid, p[n] @ diff @ p[n]))
        boff.append(MatrixField(grid, p[n] @ diff @ q[n] + q[n] @ diff @ p[n]))
    b_d = MatrixField(grid, sum(b.values for b in bd))
    b_off = MatrixField(grid, sum(b.values for b in boff))
    return CZParts(f, res, MatrixField(grid, g), b_d, b_off, bd, boff, zeta(res, tol))


def _cube_values(res, k):
    """``p_k`` evaluated on each generation-``k`` cube, shape ``(ncubes, m, m)``."""
    labels = cube_labels(res.grid, k)
    first = np.zeros(2 ** (res.grid.d * k), dtype=int)
    first[labels[::-1]] = np.arange(res.grid.ncells)[::-1]
    return res.p[k][first]


def zeta(res, tol=DEFAULT):
    """``zeta(x) = 1 - join{p_Q : x in 5Q}`` over generations ``1..J``.

    Cubes with ``p_Q = 0`` leave the join unchanged and are skipped.
    """
    grid = res.grid
    eye = np.eye(grid.m, dtype=complex)
    per_cell = [[] for _ in range(grid.ncells)]
    for k in range(1, grid.J + 1):
        pq = _cube_values(res, k)
        active = np.real(np.trace(pq, axis1=-2, axis2=-1)) > 0.5
        masks = dilation_masks(grid, k)
        for c in np.flatnonzero(active):
            for x in np.flatnonzero(masks[c]):
                per_cell[x].append(pq[c])
    out = np.empty((grid.ncells, grid.m, grid.m), dtype=complex)
    for x, projs in enumerate(per_cell):
        out[x] = eye - linalg.proj_join(projs, tol.join_cutoff) if projs else eye
    return MatrixField(grid, out)


def weighted_cuculescu_bound(res, f, w, tol=DEFAULT):
    """Report for ``lam * phi_w(1 - q) <= [w]_A1 * ||f||_{1,w}``."""
    one_minus_q = MatrixField(res.grid, np.eye(res.grid.m) - res.q_final)
    lhs = res.lam * trace(one_minus_q, w).real
    rhs = w.a1 * lp_norm(f, 1, w)
    return inequality(
        "cuculescu_weighted", lhs, rhs, tol.inequality,
        lam=res.lam, grid=res.grid, extra={"a1": w.a1},
    )
