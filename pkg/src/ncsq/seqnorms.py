"""Row, column and row-column norms of finite sequences of matrix fields.

A sequence is a list of :class:`MatrixField` on one grid (optionally all
with the same sample axis).  For ``p < 2`` the row-column norm is an
infimum over splittings ``F_k = G_k + H_k``; it is reported as a certified
bracket: the upper end is the best splitting found, the lower end the best
duality certificate.
"""
from dataclasses import dataclass

import numpy as np

from . import linalg
from .field import MatrixField, lp_norm, weak_l1_quasinorm


@dataclass(frozen=True)
class Bracket:
    """Certified interval ``lower <= value <= upper``."""

    lower: float
    upper: float
    converged: bool = True

    @property
    def gap(self):
        return self.upper - self.lower


@dataclass(frozen=True)
class OptimizerSettings:
    iterations: int = 500
    step: float = 0.5
    huber: float = 1e-6
    dual_samples: int = 8
    seed: int = 0


def _stack(seq):
    seq = list(seq)
    if not seq:
        raise ValueError("empty sequence")
    grid = seq[0].grid
    if any(F.grid != grid for F in seq):
        raise ValueError("sequence elements live on different grids")
    shapes = {F.values.shape for F in seq}
    if len(shapes) != 1:
        raise ValueError("sequence elements have different sample axes")
    return grid, np.stack([F.values for F in seq])


def _measure(grid, w, lead):
    """Cell measure broadcast over ``lead = (R, ncells)`` or ``(ncells,)``, samples averaged."""
    mu = np.full(grid.ncells, grid.cell_volume)
    if w is not None:
        mu = mu * np.asarray(getattr(w, "values", w), dtype=float)
    if len(lead) == 2:
        mu = np.broadcast_to(mu / lead[0], lead)
    return mu


def _column_square(a):
    return np.einsum("k...ji,k...jl->...il", a.conj(), a)


def _row_square(a):
    return np.einsum("k...ij,k...lj->...il", a, a.conj())


def _schatten_of_root(square, p, mu):
    """``(sum mu tr(square^(p/2)))^(1/p)``, ``p = inf`` gives the max of ``sqrt(||square||)``."""
    ev = np.clip(linalg.eigvalsh(square), 0.0, None)
    if np.isinf(p):
        return float(np.sqrt(ev.max(initial=0.0)))
    return float(np.sum(mu * np.sum(ev ** (p / 2), axis=-1)) ** (1.0 / p))


def _check_p(p):
    if not p >= 1:
        raise ValueError(f"sequence norms need 1 <= p <= inf, got {p}")


def column_square_root(seq):
    """``(sum_k F_k* F_k)^(1/2)`` as a field."""
    grid, a = _stack(seq)
    return MatrixField(grid, linalg.psd_power(_column_square(a), 0.5))


def row_square_root(seq):
    """``(sum_k F_k F_k*)^(1/2)`` as a field."""
    grid, a = _stack(seq)
    return MatrixField(grid, linalg.psd_power(_row_square(a), 0.5))


def column_norm(seq, p, w=None):
    _check_p(p)
    grid, a = _stack(seq)
    return _schatten_of_root(_column_square(a), p, _measure(grid, w, a.shape[1:-2]))


def row_norm(seq, p, w=None):
    _check_p(p)
    grid, a = _stack(seq)
    return _schatten_of_root(_row_square(a), p, _measure(grid, w, a.shape[1:-2]))


def _col(a, p, mu):
    return _schatten_of_root(_column_square(a), p, mu)


def _row(a, p, mu):
    return _schatten_of_root(_row_square(a), p, mu)


def _pairing(a, y, mu):
    """``sum_k phi_w(F_k Y_k*)``."""
    return complex(np.sum(mu * np.einsum("k...ij,k...ij->...", a, y.conj())))


def _certificate(a, y, p, mu):
    """Lower bound ``|<F, Y>| / max(col_p'(Y), row_p'(Y))`` (zero for a zero ``Y``)."""
    q = np.inf if p == 1 else p / (p - 1)
    denom = max(_col(y, q, mu), _row(y, q, mu))
    if not denom > 0:
        return 0.0
    return abs(_pairing(a, y, mu)) / denom


def _column_gradient(g, p, mu, smooth):
    """Gradient of ``col_p`` in the ``phi_w`` inner product (smoothed by ``smooth**2``)."""
    s = _column_square(g)
    eye = np.eye(s.shape[-1])
    phi = np.sum(mu * np.sum(np.clip(linalg.eigvalsh(s), 0, None) ** (p / 2), axis=-1))
    if not phi > 0:
        return np.zeros_like(g)
    power = linalg.psd_power(s + smooth**2 * eye, p / 2 - 1)
    return phi ** (1 / p - 1) * (g @ power)


def _row_gradient(h, p, mu, smooth):
    r = _row_square(h)
    eye = np.eye(r.shape[-1])
    phi = np.sum(mu * np.sum(np.clip(linalg.eigvalsh(r), 0, None) ** (p / 2), axis=-1))
    if not phi > 0:
        return np.zeros_like(h)
    power = linalg.psd_power(r + smooth**2 * eye, p / 2 - 1)
    return phi ** (1 / p - 1) * (power @ h)


def _inner_norm(x, mu):
    return float(np.sqrt(np.sum(mu * np.sum(np.abs(x) ** 2, axis=(0, -2, -1)))))


def optimize_split(a, p, mu, settings=OptimizerSettings()):
    """Gradient descent on ``G -> col_p(G) + row_p(F - G)``.

    Steps are normalised and shrink like ``c / sqrt(t)``; a step is kept only
    if it lowers the exact objective, otherwise ``c`` is halved.  Returns the
    best ``G``, its objective and a convergence flag: true when the step size
    collapsed (no descent left) or the last 50 iterations gained less than
    ``1e-6`` relatively.
    """
    scale = _inner_norm(a, mu)
    if scale == 0:
        return np.zeros_like(a), 0.0, True
    smooth = settings.huber * scale
    g = 0.5 * a
    best = _col(g, p, mu) + _row(a - g, p, mu)
    history = [best]
    c = settings.step * scale
    collapsed = False
    for t in range(1, settings.iterations + 1):
        grad = _column_gradient(g, p, mu, smooth) - _row_gradient(a - g, p, mu, smooth)
        size = _inner_norm(grad, mu)
        if size == 0:
            collapsed = True
            break
        trial = g - (c / np.sqrt(t)) * grad / size
        value = _col(trial, p, mu) + _row(a - trial, p, mu)
        if value < best:
            g, best = trial, value
        else:
            c *= 0.5
            if c < 1e-14 * scale:
                collapsed = True
                break
        history.append(best)
    stalled = len(history) > 50 and history[-51] - best <= 1e-6 * best
    return g, best, collapsed or stalled


def _hermitian_split(a):
    herm = 0.5 * (a + linalg.adjoint(a))
    return herm, a - herm


def rc_norm(seq, p, w=None, settings=OptimizerSettings()):
    """Bracket for the row-column norm.

    ``p >= 2``: the exact value ``max(row, column)``.  ``p < 2``: the upper
    end is the smallest ``col_p(G) + row_p(H)`` over the all-column,
    all-row, Hermitian/anti-Hermitian and optimised splittings; the lower end
    is the largest duality pairing ``|<F, Y>|`` over certificates ``Y`` in
    the unit ball of the dual (intersection) norm.
    """
    _check_p(p)
    grid, a = _stack(seq)
    mu = _measure(grid, w, a.shape[1:-2])
    col, row = _col(a, p, mu), _row(a, p, mu)
    if p >= 2:
        value = max(col, row)
        return Bracket(value, value)
    herm, skew = _hermitian_split(a)
    g, opt, converged = optimize_split(a, p, mu, settings)
    candidates = [col, row, _col(herm, p, mu) + _row(skew, p, mu), _col(skew, p, mu) + _row(herm, p, mu), opt]
    upper = min(candidates)

    s_col = _column_square(a)
    s_row = _row_square(a)
    duals = [a @ linalg.psd_power(s_col, (p - 2) / 2), linalg.psd_power(s_row, (p - 2) / 2) @ a]
    smooth = settings.huber * _inner_norm(a, mu)
    y_g = _column_gradient(g, p, mu, smooth)
    y_h = _row_gradient(a - g, p, mu, smooth)
    for t in np.linspace(0, 1, 11):
        duals.append(t * y_g + (1 - t) * y_h)
    rng = np.random.default_rng(settings.seed)
    for _ in range(settings.dual_samples):
        noise = rng.normal(size=a.shape) + 1j * rng.normal(size=a.shape)
        duals.append(duals[0] + 0.1 * noise * np.abs(duals[0]).max(initial=0.0))
    lower = max(_certificate(a, y, p, mu) for y in duals)
    return Bracket(float(lower), float(upper), converged)


def weak_rc_quasinorm(seq, w=None, settings=OptimizerSettings()):
    """Bracket for the weak row-column quasi-norm at ``p = 1``.

    A splitting ``F_k = G_k + H_k`` costs the weak quasi-norm of the column
    square root of ``G`` plus that of the row square root of ``H``; the
    upper end is the cheapest of the all-column, all-row, Hermitian and
    optimised (strong ``p = 1``) splittings.  Since ``|G_k|`` is dominated by
    the column square root and the weak quasi-norm obeys a quasi-triangle
    inequality with constant 2, half of ``max_k ||F_k||_{1,inf}`` is a lower end.
    """
    grid, a = _stack(seq)
    if not np.any(a):
        return Bracket(0.0, 0.0)
    mu = _measure(grid, w, a.shape[1:-2])

    def weak_cost(g):
        h = a - g
        cost = 0.0
        if np.any(g):
            cost += weak_l1_quasinorm(MatrixField(grid, linalg.psd_power(_column_square(g), 0.5)), w)
        if np.any(h):
            cost += weak_l1_quasinorm(MatrixField(grid, linalg.psd_power(_row_square(h), 0.5)), w)
        return cost

    herm, skew = _hermitian_split(a)
    g_opt, _, converged = optimize_split(a, 1, mu, settings)
    upper = min(weak_cost(g) for g in (a, np.zeros_like(a), herm, skew, g_opt))
    lower = 0.5 * max(weak_l1_quasinorm(MatrixField(grid, x), w) for x in a)
    return Bracket(float(lower), float(upper), converged)


def randomized_norm(seq, p, w=None, signs=None):
    """``(E || sum_k eps_k F_k ||_{p,w}^p)^(1/p)`` over the rows of a sign matrix.

    ``signs`` is an ``(R, K)`` array of +-1 or a :class:`SignSample`; without
    it all ``2**K`` patterns are used.
    """
    grid, a = _stack(seq)
    if a.ndim != 4:
        raise ValueError("randomized_norm expects fields without a sample axis")
    if signs is None:
        K = a.shape[0]
        signs = np.array(np.meshgrid(*[[-1.0, 1.0]] * K, indexing="ij")).reshape(K, -1).T
    signs = np.asarray(getattr(signs, "signs", signs), dtype=float)
    combos = np.einsum("sk,kxij->sxij", signs, a)
    return lp_norm(MatrixField(grid, combos), p, w)
