"""Dense Hermitian linear algebra on stacks of small matrices.

Every routine accepts arrays of shape ``(..., m, m)`` and works on the
trailing two axes, so a whole matrix field is handled in one call.  The
eigensolver is a cyclic Jacobi iteration vectorised over the leading axes.
"""
import numpy as np

from ._config import DEFAULT

INTERVALS = ("(0,lam]", "(lam,inf)", "[0,lam]")


def adjoint(x):
    return np.conj(np.swapaxes(x, -1, -2))


def _frobenius(x):
    return np.sqrt(np.sum(np.abs(x) ** 2, axis=(-2, -1)))


def hermitian(a, tol=DEFAULT):
    """Validate ``a`` as Hermitian up to tolerance and return ``(a + a*)/2``."""
    a = np.asarray(a)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    a = a.astype(complex)
    skew = _frobenius(a - adjoint(a))
    scale = np.maximum(1.0, _frobenius(a))
    if np.any(skew > 1e2 * tol.identity * scale):
        raise ValueError(f"matrix is not Hermitian (skew part {np.max(skew):.3e})")
    return 0.5 * (a + adjoint(a))


def _jacobi(a, tol):
    """Cyclic Jacobi on a stack ``(B, m, m)`` of Hermitian matrices."""
    a = a.copy()
    nb, m, _ = a.shape
    v = np.broadcast_to(np.eye(m, dtype=complex), (nb, m, m)).copy()
    thresh = tol.jacobi * _frobenius(a)
    idx = np.arange(m)
    for _ in range(tol.jacobi_max_sweeps):
        off = np.abs(a)
        off[:, idx, idx] = 0.0
        if m == 1 or np.all(off.max(axis=(1, 2)) <= thresh):
            break
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = a[:, p, q]
                mag = np.abs(apq)
                active = mag > thresh
                if not np.any(active):
                    continue
                safe = np.where(active, mag, 1.0)
                phase = np.where(active, apq / safe, 1.0)
                app = a[:, p, p].real
                aqq = a[:, q, q].real
                with np.errstate(over="ignore"):
                    tau = (aqq - app) / (2.0 * safe)
                    t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
                t = np.where(active, t, 0.0)
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # U = diag(1, e^{-i phi}) R diag(1, e^{i phi}) with R the real rotation
                u_pp = c
                u_pq = s * phase
                u_qp = -s * np.conj(phase)
                u_qq = c
                cp = a[:, :, p].copy()
                cq = a[:, :, q]
                a[:, :, p] = cp * u_pp[:, None] + cq * u_qp[:, None]
                a[:, :, q] = cp * u_pq[:, None] + cq * u_qq[:, None]
                rp = a[:, p, :].copy()
                rq = a[:, q, :]
                a[:, p, :] = np.conj(u_pp)[:, None] * rp + np.conj(u_qp)[:, None] * rq
                a[:, q, :] = np.conj(u_pq)[:, None] * rp + np.conj(u_qq)[:, None] * rq
                a[:, p, q] = 0.0
                a[:, q, p] = 0.0
                vp = v[:, :, p].copy()
                vq = v[:, :, q]
                v[:, :, p] = vp * u_pp[:, None] + vq * u_qp[:, None]
                v[:, :, q] = vp * u_pq[:, None] + vq * u_qq[:, None]
    w = a[:, idx, idx].real
    order = np.argsort(w, axis=-1, kind="stable")
    w = np.take_along_axis(w, order, axis=-1)
    v = np.take_along_axis(v, order[:, None, :], axis=-1)
    return w, v


def eigh(a, tol=DEFAULT):
    """Eigenvalues (ascending) and orthonormal eigenvectors of Hermitian ``a``.

    Returns ``(w, v)`` with ``a = v @ diag(w) @ v*`` over the leading axes.
    """
    a = hermitian(a, tol)
    shape = a.shape
    m = shape[-1]
    flat = a.reshape(-1, m, m)
    if flat.shape[0] == 0:
        return np.zeros(shape[:-1]), np.zeros(shape, dtype=complex)
    w, v = _jacobi(flat, tol)
    return w.reshape(shape[:-1]), v.reshape(shape)


def eigvalsh(a, tol=DEFAULT):
    return eigh(a, tol)[0]


def _zero_eps(w, a, tol):
    scale = np.maximum(1.0, np.max(np.abs(w), axis=-1, keepdims=True))
    return tol.eig_zero * scale


def spectral_projection(a, interval, lam, tol=DEFAULT):
    """Spectral projection of Hermitian ``a`` onto one of three intervals.

    ``interval`` is ``"(0,lam]"``, ``"(lam,inf)"`` or ``"[0,lam]"``.
    Eigenvalues within ``tol.eig_zero * max(1, ||a||)`` of zero count as 0.
    """
    if interval not in INTERVALS:
        raise ValueError(f"unknown interval {interval!r}; expected one of {INTERVALS}")
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    w, v = eigh(a, tol)
    eps = _zero_eps(w, a, tol)
    is_zero = np.abs(w) <= eps
    if interval == "(0,lam]":
        keep = (w > eps) & (w <= lam)
    elif interval == "(lam,inf)":
        keep = (w > lam) & ~is_zero
    else:
        keep = is_zero | ((w > 0) & (w <= lam))
    return (v * keep[..., None, :]) @ adjoint(v)


def funm(a, fn, tol=DEFAULT):
    """Apply a scalar function to Hermitian ``a`` through its eigenvalues."""
    w, v = eigh(a, tol)
    return (v * fn(w)[..., None, :]) @ adjoint(v)


def psd_power(a, power, tol=DEFAULT):
    """``a**power`` for PSD ``a``; negative powers act on the support only."""
    w, v = eigh(a, tol)
    eps = _zero_eps(w, a, tol)
    pos = w > eps
    safe = np.where(pos, w, 1.0)
    fw = np.where(pos, safe ** power, 0.0)
    return (v * fw[..., None, :]) @ adjoint(v)


def absolute(x, tol=DEFAULT):
    """``|x| = (x* x)^(1/2)``."""
    x = np.asarray(x, dtype=complex)
    return funm(adjoint(x) @ x, lambda w: np.sqrt(np.clip(w, 0.0, None)), tol)


def singular_values(x, tol=DEFAULT):
    """Singular values in ascending order, computed through ``x* x``."""
    x = np.asarray(x, dtype=complex)
    return np.sqrt(np.clip(eigvalsh(adjoint(x) @ x, tol), 0.0, None))


def psd_leq(a, b, tol=0.0):
    """True where ``a <= b`` in the operator order, i.e. ``min eig(b - a) >= -tol``."""
    w = eigvalsh(np.asarray(b) - np.asarray(a))
    return w[..., 0] >= -tol


def min_eig(a):
    return eigvalsh(a)[..., 0]


def is_projection(p, tol=DEFAULT):
    p = np.asarray(p)
    return bool(
        np.all(_frobenius(p - adjoint(p)) <= tol.projection * max(1, p.shape[-1]))
        and np.all(_frobenius(p @ p - p) <= tol.projection * max(1, p.shape[-1]))
    )


def operator_norm(x):
    return singular_values(x)[..., -1]


def schatten_norm(x, p):
    """Schatten ``p``-norm over the trailing two axes, ``1 <= p <= inf``."""
    if not p >= 1:
        raise ValueError(f"Schatten norm needs p >= 1, got {p}")
    s = singular_values(x)
    if np.isinf(p):
        return s[..., -1]
    return np.sum(s**p, axis=-1) ** (1.0 / p)


def orthonormal_range(columns, cutoff=DEFAULT.join_cutoff):
    """Orthonormal basis for the span of ``columns`` (an ``m x k`` array).

    Modified Gram-Schmidt with one re-orthogonalisation pass; a candidate is
    dropped when its residual norm falls below ``cutoff``.
    """
    columns = np.asarray(columns, dtype=complex)
    m = columns.shape[0]
    basis = []
    for j in range(columns.shape[1]):
        vec = columns[:, j].copy()
        for _ in range(2):
            for b in basis:
                vec -= b * np.vdot(b, vec)
        norm = np.linalg.norm(vec)
        if norm > cutoff:
            basis.append(vec / norm)
            if len(basis) == m:
                break
    if not basis:
        return np.zeros((m, 0), dtype=complex)
    return np.stack(basis, axis=1)


def proj_join(projections, cutoff=DEFAULT.join_cutoff):
    """Projection onto the span of the union of ranges of ``projections``."""
    projections = [np.asarray(p, dtype=complex) for p in projections]
    if not projections:
        raise ValueError("proj_join needs at least one projection (its size is otherwise unknown)")
    basis = orthonormal_range(np.concatenate(projections, axis=1), cutoff)
    return basis @ adjoint(basis)
