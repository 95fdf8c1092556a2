"""Almost-orthogonality lemma as a standalone engine.

An :class:`AOInstance` bundles operators ``S_k`` on ``C^D``, pieces
``u_n`` with ``h = sum_n u_n``, majorants ``v_n`` and coefficients
``kappa(j)``.  The conclusion ``sum_k ||S_k h||^2 <= (sum_j kappa(j))^2 sum_n ||v_n||^2``
is asserted only when every hypothesis ``||S_k u_n|| <= kappa(n - k) ||v_n||`` holds.
"""
from dataclasses import dataclass, field

import numpy as np

from .._config import DEFAULT
from ..operators import difference_matrix
from ..report import CheckReport


@dataclass
class AOInstance:
    """``S`` has shape ``(K, D, D)``, ``u`` and ``v`` shape ``(N, D)``.

    ``k_labels`` / ``n_labels`` give the scale index of each operator and
    piece; ``kappa`` maps every gap ``n - k`` that occurs to a nonnegative
    coefficient, and its values are summed for the constant.
    """

    S: np.ndarray
    u: np.ndarray
    v: np.ndarray
    kappa: dict
    k_labels: np.ndarray = None
    n_labels: np.ndarray = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.S = np.asarray(self.S)
        self.u = np.asarray(self.u)
        self.v = np.asarray(self.v)
        if self.S.ndim != 3 or self.S.shape[1] != self.S.shape[2]:
            raise ValueError("S must have shape (K, D, D)")
        D = self.S.shape[1]
        if self.u.ndim != 2 or self.u.shape[1] != D or self.v.shape != self.u.shape:
            raise ValueError("u and v must have shape (N, D) matching S")
        if self.k_labels is None:
            self.k_labels = np.arange(self.S.shape[0])
        if self.n_labels is None:
            self.n_labels = np.arange(self.u.shape[0])
        self.k_labels = np.asarray(self.k_labels)
        self.n_labels = np.asarray(self.n_labels)
        if len(self.k_labels) != self.S.shape[0] or len(self.n_labels) != self.u.shape[0]:
            raise ValueError("label arrays do not match S and u")
        if any(value < 0 for value in self.kappa.values()):
            raise ValueError("kappa must be nonnegative")

    @property
    def h(self):
        return self.u.sum(axis=0)

    def kappa_of(self, gap):
        return self.kappa.get(int(gap), 0.0)

    @property
    def kappa_sum(self):
        return float(sum(self.kappa.values()))


def hypothesis_excess(inst):
    """Largest ``||S_k u_n|| - kappa(n - k) ||v_n||`` relative to the scale of the instance."""
    su = np.linalg.norm(np.einsum("kij,nj->kni", inst.S, inst.u), axis=-1)
    vn = np.linalg.norm(inst.v, axis=-1)
    gaps = inst.n_labels[None, :] - inst.k_labels[:, None]
    bound = np.vectorize(inst.kappa_of, otypes=[float])(gaps) * vn[None, :]
    scale = max(1.0, float(su.max(initial=0.0)), float(bound.max(initial=0.0)))
    return float((su - bound).max(initial=-np.inf)) / scale


def check_almost_orthogonality(inst, seed=None, tol=DEFAULT):
    """Conclusion of the lemma, or ``hypothesis-failed`` when a premise does not hold."""
    lhs = float(np.sum(np.abs(np.einsum("kij,j->ki", inst.S, inst.h)) ** 2))
    rhs = inst.kappa_sum**2 * float(np.sum(np.abs(inst.v) ** 2))
    excess = hypothesis_excess(inst)
    extra = {"hypothesis_excess": excess, **inst.meta}
    if excess > tol.inequality:
        return CheckReport("almost_orthogonality", lhs, rhs, "hypothesis-failed", tol.inequality,
                           seed=seed, extra=extra)
    ok = lhs <= rhs * (1 + tol.inequality)
    return CheckReport("almost_orthogonality", lhs, rhs, "pass" if ok else "fail", tol.inequality,
                       seed=seed, extra=extra)


def _complex_normal(rng, shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def random_instance(seed, K=None, N=None, D=None, delta=0.5, violate=False):
    """Random instance whose operators are rescaled so that the hypothesis holds.

    With ``violate=True`` one operator is then inflated so that at least one
    hypothesis inequality fails.
    """
    rng = np.random.default_rng([0xA0, seed])
    K = K or int(rng.integers(1, 6))
    N = N or int(rng.integers(1, 6))
    D = D or int(rng.integers(2, 9))
    S = _complex_normal(rng, (K, D, D))
    u = _complex_normal(rng, (N, D))
    v = _complex_normal(rng, (N, D)) * rng.uniform(0.2, 2.0, size=(N, 1))
    k_labels = np.arange(K)
    n_labels = np.arange(N)
    kappa = {j: float(2.0 ** (-abs(j) * delta)) for j in range(-(K - 1), N)}
    su = np.linalg.norm(np.einsum("kij,nj->kni", S, u), axis=-1)
    vn = np.linalg.norm(v, axis=-1)
    allowed = np.array([[kappa[n - k] * vn[n] for n in n_labels] for k in k_labels])
    shrink = np.min(allowed / su, axis=1) * rng.uniform(0.5, 1.0, size=K)
    S = S * shrink[:, None, None]
    if violate:
        # push the worst hypothesis of one operator above its allowance
        k = int(rng.integers(0, K))
        worst = np.max(su[k] * shrink[k] / allowed[k])
        S[k] = S[k] * rng.uniform(1.5, 10.0) / worst
    return AOInstance(S, u, v, kappa, k_labels, n_labels, {"seed": seed, "violate": violate})


def _embed(parts, w):
    """Maps between fields and vectors of ``C^D`` isometric for the ``phi_w`` L^2 norm."""
    grid = parts.grid
    mu = grid.cell_volume * (np.ones(grid.ncells) if w is None else w.values)
    root = np.sqrt(mu)[:, None, None]

    def to_vec(values):
        return (values * root).reshape(-1)

    def from_vec(vec):
        return vec.reshape(grid.ncells, grid.m, grid.m) / root

    return to_vec, from_vec


def bd_instance(parts, w=None, delta=0.5):
    """``S_k = zeta T_k(.) zeta``, ``u_n = b_n^d``, ``v_n = lam p_n``, ``kappa(j) = C 2^(-|j| delta)``.

    The operators are assembled as ``D x D`` matrices (``D = ncells m^2``) in
    the weighted L^2 model space; ``C`` is the smallest constant making all
    hypotheses hold and is recorded in ``meta``.
    """
    grid = parts.grid
    to_vec, from_vec = _embed(parts, w)
    D = grid.ncells * grid.m**2
    z = parts.zeta.values
    basis = np.eye(D, dtype=complex)
    fields = np.stack([from_vec(e) for e in basis])
    S = []
    for k in range(grid.J + 1):
        A = difference_matrix(grid, k)
        moved = np.matmul(A, fields.reshape(D, grid.ncells, -1)).reshape(fields.shape)
        cut = z @ moved @ z
        cols = np.stack([to_vec(c) for c in cut])
        S.append(cols.T)
    S = np.stack(S)
    n_labels = np.arange(1, grid.J + 1)
    u = np.stack([to_vec(parts.bd[n].values) for n in n_labels])
    v = np.stack([to_vec(parts.lam * parts.cuculescu.p[n]) for n in n_labels])
    k_labels = np.arange(grid.J + 1)
    su = np.linalg.norm(np.einsum("kij,nj->kni", S, u), axis=-1)
    vn = np.linalg.norm(v, axis=-1)
    C = 0.0
    for a, k in enumerate(k_labels):
        for b, n in enumerate(n_labels):
            if su[a, b] > 0:
                if vn[b] == 0:
                    C = np.inf
                else:
                    C = max(C, su[a, b] / (2.0 ** (-abs(n - k) * delta) * vn[b]))
    gaps = range(int(n_labels.min() - k_labels.max()), int(n_labels.max() - k_labels.min()) + 1)
    kappa = {j: float(C * 2.0 ** (-abs(j) * delta)) for j in gaps}
    return AOInstance(S, u, v, kappa, k_labels, n_labels, {"C": float(C), "delta": delta})
