"""Checks on the linearized square function ``T f = sum_k eps_k T_k f``."""
import math

import numpy as np

from .. import linalg
from .._config import DEFAULT
from ..cz import cz_decompose
from ..field import MatrixField, distribution, inner, lp_norm, singular_values
from ..operators import cond_exp, linearize, linearize_adjoint, square_function_terms
from ..report import CheckReport, inequality, vanishing

GOOD_L2_BUDGET = 16.0
GOOD_WEAK_BUDGET = 16.0
WEAK11_BUDGET = 64.0


def _ctx(f, lam, signs, seed):
    return {"lam": lam, "grid": f.grid, "R": signs.R, "seed": seed}


def check_good_part(parts, w, signs, seed=None, l2_budget=GOOD_L2_BUDGET,
                    weak_budget=GOOD_WEAK_BUDGET, tol=DEFAULT):
    """Randomized L^2 bound for ``T g``, the weighted L^1 bound for ``g`` and the weak bound at ``lam``."""
    f, g, lam = parts.f, parts.g, parts.lam
    ctx = _ctx(f, lam, signs, seed)
    a1 = w.a1
    tg = linearize(g, signs)
    l2 = lp_norm(tg, 2, w) ** 2
    ref = a1**2 * lp_norm(g, 2, w) ** 2
    ok = l2 <= l2_budget * ref * (1 + tol.inequality)
    out = [CheckReport("good_l2", l2, ref, "pass" if ok else "fail", tol.inequality,
                       budget=l2_budget, **ctx)]
    out.append(inequality("good_l1", lp_norm(g, 1, w), max(1.0, a1) * lp_norm(f, 1, w),
                          tol.inequality, **ctx))
    lhs = lam * distribution(tg, lam, w)
    ref = max(a1**2, a1**3) * lp_norm(f, 1, w)
    ok = lhs <= weak_budget * ref * (1 + tol.inequality)
    out.append(CheckReport("good_weak", lhs, ref, "pass" if ok else "fail", tol.inequality,
                           budget=weak_budget, **ctx))
    return out


def lambda_sweep(f, points=16):
    """Geometric grid spanning the singular values of ``f`` (at least 8 points)."""
    if points < 8:
        raise ValueError("the weak (1,1) sweep needs at least 8 levels")
    s = singular_values(f)
    top = float(s.max(initial=0.0))
    if top == 0:
        return np.geomspace(1e-3, 1.0, points)
    positive = s[s > 1e-12 * top]
    low = float(positive.min())
    low = min(low, top / 4)
    return np.geomspace(low, 2 * top, points)


def weak11_profile(f, w, signs, lams):
    """``lam * phi_w~(|Tf| > lam) / ||f||_{1,w}`` for each level, plus the distribution values."""
    tf = linearize(f, signs)
    sv = singular_values(tf)
    norm = lp_norm(f, 1, w)
    dist = np.array([distribution(tf, lam, w, sv) for lam in lams])
    ratios = lams * dist / norm if norm > 0 else np.zeros_like(dist)
    return ratios, dist, tf


def weak11_ratio(f, w, signs, points=16):
    lams = lambda_sweep(f, points)
    ratios, _, _ = weak11_profile(f, w, signs, lams)
    return float(ratios.max(initial=0.0))


def check_weak11(f, w, signs, points=16, budget=WEAK11_BUDGET, seed=None, tol=DEFAULT):
    """End-to-end weak (1,1) ratio over a level sweep, plus per-level splitting checks.

    At each level ``lam`` with ``E_0 f <= lam`` the field is decomposed at
    ``lam`` and the quasi-triangle inequality
    ``dist(Tf, lam) <= sum_h dist(Th, lam / 3)`` over ``h in {g, b_d, b_off}``
    is asserted; the contribution of each part is recorded.
    """
    lams = lambda_sweep(f, points)
    ratios, dist, tf = weak11_profile(f, w, signs, lams)
    a1 = w.a1
    cap = budget * max(a1**2, a1**3)
    worst = float(ratios.max(initial=0.0))
    norm = lp_norm(f, 1, w)
    root = linalg.operator_norm(cond_exp(f, 0).values[0])
    parts_max = {"g": 0.0, "b_d": 0.0, "b_off": 0.0}
    split_excess = 0.0
    for lam, d_tf in zip(lams, dist):
        if lam < root * (1 + 1e-12):
            continue
        parts = cz_decompose(f, lam, tol=tol)
        total = 0.0
        for name, h in (("g", parts.g), ("b_d", parts.b_d), ("b_off", parts.b_off)):
            d = distribution(linearize(h, signs), lam / 3, w)
            total += d
            if norm > 0:
                parts_max[name] = max(parts_max[name], lam * d / norm)
        split_excess = max(split_excess, d_tf - total)
    base = {"grid": f.grid, "R": signs.R, "seed": seed}
    rep = CheckReport("weak11", worst * norm, norm, "pass" if worst <= cap else "fail",
                      0.0, budget=cap, extra={"parts": parts_max, "levels": list(map(float, lams))},
                      **base)
    if norm == 0:
        rep.lhs = 0.0
    split = vanishing("weak11_split", max(0.0, split_excess), 1.0, tol.inequality, **base)
    mono = float(np.max(np.diff(dist), initial=0.0))
    monotone = vanishing("weak11_distribution_monotone", max(0.0, mono), 1.0, tol.inequality, **base)
    return [rep, split, monotone]


def check_refinement(ratio_coarse, ratio_fine, check_id="weak11_refinement", factor=2.0, **ctx):
    """``ratio_fine / ratio_coarse`` within ``[1/factor, factor]`` (both zero counts as stable)."""
    hi, lo = max(ratio_coarse, ratio_fine), min(ratio_coarse, ratio_fine)
    if hi == 0:
        return CheckReport(check_id, 0.0, 0.0, "pass", budget=factor, **ctx)
    spread = math.inf if lo == 0 else hi / lo
    return CheckReport(check_id, spread, 1.0, "pass" if spread <= factor else "fail",
                       budget=factor, extra={"coarse": ratio_coarse, "fine": ratio_fine}, **ctx)


def khintchine_residual(f, w, signs):
    """``|E ||T f||_{2,w}^2 - sum_k ||T_k f||_{2,w}^2|`` and the reference size."""
    lhs = lp_norm(linearize(f, signs), 2, w) ** 2
    rhs = sum(lp_norm(t, 2, w) ** 2 for t in square_function_terms(f))
    return abs(lhs - rhs), max(lhs, rhs)


def check_strong_pp(f, p, w, signs, seed=None, tol=DEFAULT, pairing_seed=0):
    """Randomized ``L^p_w`` proxy ratio; exact identities at ``p = 2``.

    At ``p = 2`` the Rademacher orthogonality identity is asserted for
    exhaustive sign samples (and only tracked for sampled ones), and the
    self-adjointness of ``T`` for the unweighted pairing is asserted.
    """
    if p not in (1.5, 2, 3):
        raise ValueError("strong (p,p) proxy is evaluated at p in {1.5, 2, 3}")
    base = {"grid": f.grid, "R": signs.R, "seed": seed}
    tf = linearize(f, signs)
    norm = lp_norm(f, p, w)
    proxy = lp_norm(tf, p, w)
    rep = CheckReport(f"strong_p{p}", proxy, norm, "pass", hard=False, **base)
    out = [rep]
    if p != 2:
        return out
    resid, scale = khintchine_residual(f, w, signs)
    if signs.exhaustive:
        out.append(vanishing("khintchine_p2", resid, scale, tol.identity, **base))
    else:
        # sampled signs only approximate the expectation; tracked, not asserted
        out.append(CheckReport("khintchine_p2_sampled", resid, scale, "pass", hard=False, **base))
    rng = np.random.default_rng([0x5A, pairing_seed])
    shape = (signs.R,) + f.values.shape
    G = MatrixField(f.grid, rng.normal(size=shape) + 1j * rng.normal(size=shape))
    left = inner(tf, G)
    right = inner(f, linearize_adjoint(G, signs))
    scale = max(1.0, abs(left), abs(right))
    out.append(vanishing("self_adjoint_pairing", abs(left - right), scale, tol.vanish, **base))
    return out
