"""Checks on the Cuculescu projections, the CZ parts and the projection zeta."""
import numpy as np

from .. import linalg
from .._config import DEFAULT
from ..cz import cuculescu, weighted_cuculescu_bound
from ..field import MatrixField, lp_norm, trace
from ..grid import cube_labels, dilation_masks
from ..operators import ball_avg, cond_exp, t_op, truncated_avg
from ..report import CheckReport, inequality, vanishing


def _excess(a, b):
    """``max(0, largest eigenvalue of a - b)``: how far ``a <= b`` fails."""
    diff = a - b
    diff = 0.5 * (diff + linalg.adjoint(diff))
    return max(0.0, float(linalg.eigvalsh(diff)[..., -1].max(initial=0.0)))


def _opnorm(x):
    return float(linalg.operator_norm(x).max(initial=0.0)) if x.size else 0.0


def _ctx(f, lam, seed=None):
    return {"lam": lam, "grid": f.grid, "seed": seed}


def check_cuculescu(f, lam, w=None, res=None, seed=None, tol=DEFAULT):
    """Structural properties of the stopping projections and the mass bounds for ``1 - q``."""
    res = res or cuculescu(f, lam, tol=tol)
    ctx = _ctx(f, lam, seed)
    grid = f.grid
    scale = max(1.0, lam, f.max_abs())
    q, p = res.q, res.p
    eye = np.eye(grid.m)
    out = []

    upper, comm, mono, proj = 0.0, 0.0, 0.0, 0.0
    for n in range(1, grid.J + 1):
        fn = cond_exp(f, n).values
        upper = max(upper, _excess(q[n] @ fn @ q[n], lam * q[n]))
        a = q[n - 1] @ fn @ q[n - 1]
        comm = max(comm, _opnorm(q[n] @ a - a @ q[n]))
        mono = max(mono, _excess(q[n], q[n - 1]))
        proj = max(proj, _opnorm(p[n] @ p[n] - p[n]), _opnorm(p[n] - linalg.adjoint(p[n])))
    out.append(vanishing("cuc_stopped_average_bound", upper, scale, tol.psd, **ctx))
    out.append(vanishing("cuc_commutation", comm, scale, tol.psd, **ctx))
    out.append(vanishing("cuc_decreasing", mono, 1.0, tol.psd, **ctx))
    out.append(vanishing("cuc_p_projection", proj, 1.0, tol.vanish, **ctx))

    disjoint = 0.0
    for i in range(1, grid.J + 1):
        for j in range(i + 1, grid.J + 1):
            disjoint = max(disjoint, _opnorm(p[i] @ p[j]))
    out.append(vanishing("cuc_p_disjoint", disjoint, 1.0, tol.vanish, **ctx))
    total = _opnorm(p.sum(axis=0) - (eye - res.q_final))
    out.append(vanishing("cuc_p_sum", total, 1.0, tol.vanish, **ctx))

    qf = res.q_final
    out.append(vanishing("cuc_qfq_bound", _excess(qf @ f.values @ qf, lam * qf), scale, tol.psd, **ctx))
    mass = trace(MatrixField(grid, eye - qf)).real
    out.append(inequality("cuc_mass", lam * mass, lp_norm(f, 1), tol.inequality, **ctx))
    if w is not None:
        rep = weighted_cuculescu_bound(res, f, w, tol)
        rep.seed = seed
        out.append(rep)
    return out


def check_cz_proposition(parts, seed=None, tol=DEFAULT):
    """Reconstruction, size bounds on ``g`` and ``b_d``, and the vanishing conditional expectations."""
    f, lam, grid = parts.f, parts.lam, parts.grid
    ctx = _ctx(f, lam, seed)
    res = parts.cuculescu
    fnorm = max(f.max_abs(), 1e-300)
    out = []
    recon = (parts.g + parts.b_d + parts.b_off - f).max_abs()
    out.append(vanishing("cz_reconstruction", recon / fnorm, 1.0, tol.identity, **ctx))
    f1 = lp_norm(f, 1)
    out.append(inequality("cz_g_l1", lp_norm(parts.g, 1), f1, tol.inequality, **ctx))
    out.append(inequality("cz_g_linf", lp_norm(parts.g, np.inf), 2**grid.d * lam, tol.psd, **ctx))
    bsum = sum(lp_norm(b, 1) for b in parts.bd[1:])
    out.append(inequality("cz_bd_mass", bsum, 2 * f1, tol.inequality, **ctx))

    van_d, van_off, pfq, alt = 0.0, 0.0, 0.0, 0.0
    for n in range(1, grid.J + 1):
        van_d = max(van_d, cond_exp(parts.bd[n], n).max_abs())
        van_off = max(van_off, cond_exp(parts.boff[n], n).max_abs())
        fn = cond_exp(f, n).values
        pn, qn = res.p[n], res.q[n]
        pfq = max(pfq, float(np.abs(pn @ fn @ qn).max(initial=0.0)))
        direct = pn @ f.values @ qn + qn @ f.values @ pn
        alt = max(alt, float(np.abs(direct - parts.boff[n].values).max(initial=0.0)))
    out.append(vanishing("cz_bd_mean_zero", van_d, fnorm, tol.vanish, **ctx))
    out.append(vanishing("cz_boff_mean_zero", van_off, fnorm, tol.vanish, **ctx))
    out.append(vanishing("cz_pfq_zero", pfq, fnorm, tol.vanish, **ctx))
    out.append(vanishing("cz_boff_direct_form", alt, fnorm, tol.vanish, **ctx))
    return out


def zeta_cancellation(parts):
    """``max |p_Q zeta(x)|`` and ``max |zeta(x) p_Q|`` over cubes ``Q`` and cells ``x in 5Q``."""
    res, z = parts.cuculescu, parts.zeta.values
    grid = parts.grid
    worst = 0.0
    for k in range(1, grid.J + 1):
        labels = cube_labels(grid, k)
        masks = dilation_masks(grid, k)
        pk = res.p[k]
        for c in range(masks.shape[0]):
            cells = np.flatnonzero(masks[c])
            pq = pk[np.flatnonzero(labels == c)[0]]
            if not np.any(pq):
                continue
            worst = max(worst, float(np.abs(pq @ z[cells]).max()), float(np.abs(z[cells] @ pq).max()))
    return worst


def check_zeta(parts, w, seed=None, tol=DEFAULT):
    """Cancellation on dilated stopped cubes and the weighted mass bound for ``1 - zeta``."""
    f, lam, grid = parts.f, parts.lam, parts.grid
    ctx = _ctx(f, lam, seed)
    out = [vanishing("zeta_cancellation", zeta_cancellation(parts), 1.0, tol.vanish, **ctx)]
    z = parts.zeta.values
    proj = max(_opnorm(z @ z - z), _opnorm(z - linalg.adjoint(z)))
    out.append(vanishing("zeta_projection", proj, 1.0, tol.vanish, **ctx))
    mass = trace(MatrixField(grid, np.eye(grid.m) - z), w).real
    bound = 5**grid.d * w.a1**2 * lp_norm(f, 1, w) / lam
    out.append(inequality("zeta_mass", mass, bound, tol.inequality, extra={"a1": w.a1}, **ctx))
    return out


def check_bd_vanishing(parts, seed=None, tol=DEFAULT):
    """``zeta T_k(b_n^d) zeta = 0`` for ``k >= n``; ``M_k b_n^d = M_{k,n} b_n^d`` and ``E_k b_n^d = 0`` for ``k < n``."""
    f, lam, grid = parts.f, parts.lam, parts.grid
    ctx = _ctx(f, lam, seed)
    z = parts.zeta.values
    scale = max(f.max_abs(), 1e-300)
    cut, trunc, mart = 0.0, 0.0, 0.0
    for n in range(1, grid.J + 1):
        b = parts.bd[n]
        for k in range(grid.J + 1):
            if k >= n:
                cut = max(cut, float(np.abs(z @ t_op(b, k).values @ z).max(initial=0.0)))
            else:
                diff = ball_avg(b, k) - truncated_avg(b, k, n)
                trunc = max(trunc, diff.max_abs())
                mart = max(mart, cond_exp(b, k).max_abs())
    return [
        vanishing("bd_zeta_cut", cut, scale, tol.vanish, **ctx),
        vanishing("bd_truncation", trunc, scale, tol.vanish, **ctx),
        vanishing("bd_martingale", mart, scale, tol.vanish, **ctx),
    ]


def cadilhac_sides(res, f, k, K, E):
    """Both sides of the stopped-cube trace bound for ``p_k f q_k`` and ``q_k f p_k``.

    Returns ``(lhs_pfq, lhs_qfp, bound, literal)`` with
    ``bound = 2 lam phi(chi_E p_k)`` and ``literal = 2 lam phi(chi_E p_k f)``.
    """
    grid = f.grid
    K, E = np.asarray(K, dtype=bool), np.asarray(E, dtype=bool)
    if np.any(K & ~E):
        raise ValueError("K must be contained in E")
    labels = cube_labels(grid, k)
    hits = np.bincount(labels, weights=E, minlength=2 ** (grid.d * k))
    sizes = np.bincount(labels, minlength=2 ** (grid.d * k))
    if np.any((hits > 0) & (hits < sizes)):
        raise ValueError(f"E must be a union of generation-{k} cubes")
    pk, qk = res.p[k], res.q[k]
    vol = grid.cell_volume
    pfq = vol * np.sum((pk @ f.values @ qk)[K], axis=0)
    qfp = vol * np.sum((qk @ f.values @ pk)[K], axis=0)
    lhs1 = linalg.schatten_norm(pfq, 1)
    lhs2 = linalg.schatten_norm(qfp, 1)
    chi = MatrixField(grid, pk).restrict(E)
    bound = 2 * res.lam * trace(chi).real
    literal = 2 * res.lam * trace(chi @ f).real
    return float(lhs1), float(lhs2), float(bound), float(literal)


def check_cadilhac(res, f, k, K, E, seed=None, tol=DEFAULT):
    """Trace-norm bound for the integral of ``p_k f q_k`` over ``K`` inside a union ``E`` of cubes."""
    lhs1, lhs2, bound, literal = cadilhac_sides(res, f, k, K, E)
    ctx = _ctx(f, res.lam, seed)
    extra = {"k": k, "literal_rhs": literal}
    out = [
        inequality("cadilhac_pfq", lhs1, bound, tol.inequality, extra=dict(extra), **ctx),
        inequality("cadilhac_qfp", lhs2, bound, tol.inequality, extra=dict(extra), **ctx),
    ]
    lit = inequality("cadilhac_literal", max(lhs1, lhs2), literal, tol.inequality, extra=dict(extra), **ctx)
    lit.hard = False
    out.append(lit)
    return out


def cadilhac_family(res, f, seed=0, subsets=4, tol=DEFAULT):
    """Cadilhac checks over every generation with stopping: ``E`` = all stopped cubes, ``K`` random subsets."""
    grid = f.grid
    rng = np.random.default_rng([0xCAD, seed])
    reports = []
    for k in range(1, grid.J + 1):
        E = res.stopped(k)
        if not E.any():
            continue
        members = np.flatnonzero(E)
        choices = [E]
        for _ in range(subsets):
            K = grid.empty()
            K[rng.choice(members, size=int(rng.integers(1, members.size + 1)), replace=False)] = True
            choices.append(K)
        for K in choices:
            reports.append(check_cadilhac(res, f, k, K, E, seed, tol))
    return _worst_per_id(reports, res, f, seed)


def _worst_per_id(groups, res, f, seed):
    """Collapse repeated checks to the one with the largest ratio per check id."""
    worst = {}
    for group in groups:
        for r in group:
            if r.check_id not in worst or r.ratio > worst[r.check_id].ratio or r.failed:
                if r.check_id in worst and worst[r.check_id].failed and not r.failed:
                    continue
                worst[r.check_id] = r
    if not worst:
        ctx = _ctx(f, res.lam, seed)
        for cid in ("cadilhac_pfq", "cadilhac_qfp"):
            worst[cid] = CheckReport(cid, 0.0, 0.0, **ctx)
    return list(worst.values())
