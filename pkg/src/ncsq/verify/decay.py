"""Scale-gap decay of the truncated averages and the off-diagonal sum."""
import math

import numpy as np

from ..field import lp_norm
from ..operators import ball_avg, cond_exp, truncated_avg
from ..report import CheckReport

SLACK = 0.5


def gap_ratios(h, p, w, positive=False):
    """``{gap: max_k ||M_{k,k+gap} h||^p / ||h||^p}`` over gaps ``1..J-1``.

    With ``positive=True`` the denominator is ``||E_n h||^p`` with ``n = k + gap``.
    """
    grid = h.grid
    ratios = {}
    for gap in range(1, grid.J):
        best = 0.0
        for k in range(0, grid.J - gap + 1):
            n = k + gap
            base = lp_norm(cond_exp(h, n) if positive else h, p, w) ** p
            if base == 0:
                continue
            best = max(best, lp_norm(truncated_avg(h, k, n), p, w) ** p / base)
        ratios[gap] = best
    return ratios


def decay_slope(ratios):
    """Least-squares slope of ``log2(ratio)`` against the gap; zero ratios are left out.

    Returns ``None`` when fewer than two positive ratios remain.
    """
    pts = [(g, math.log2(r)) for g, r in sorted(ratios.items()) if r > 0]
    if len(pts) < 2:
        return None
    x = np.array([g for g, _ in pts], dtype=float)
    y = np.array([v for _, v in pts])
    return float(np.polyfit(x, y, 1)[0])


def check_main_lemma(h, p, w, delta=None, positive=False, seed=None, lam=math.nan):
    """Decay of ``||M_{k,n} h||_{p,w}^p`` in the gap ``n - k``.

    ``lhs = SLACK * delta`` is the required decay rate and ``rhs`` the
    measured one (minus the fitted log2 slope); the check passes when the
    measured rate is at least the required one.  Fewer than two usable gaps
    make the check vacuous (reported with ``rhs = inf``).
    """
    if p not in (1, 2):
        raise ValueError("the decay check is run at p = 1 or p = 2")
    if h.grid.J < 2:
        raise ValueError("gap family empty: need J >= 2")
    delta = w.delta().delta if delta is None else delta
    ratios = gap_ratios(h, p, w, positive)
    slope = decay_slope(ratios)
    rate = math.inf if slope is None else -slope
    cid = f"main_lemma_p{p}" + ("_positive" if positive else "")
    extra = {"delta": delta, "ratios": ratios}
    rep = CheckReport(cid, SLACK * delta, rate, "pass" if SLACK * delta <= rate else "fail",
                      0.0, seed=seed, lam=lam, grid=h.grid, extra=extra)
    return rep


def offdiag_sum(parts, w):
    """``sum_n sum_{k<n} ||M_k b_n^off||_{1,w}``."""
    total = 0.0
    for n in range(1, parts.grid.J + 1):
        b = parts.boff[n]
        if not np.any(b.values):
            continue
        for k in range(n):
            total += lp_norm(ball_avg(b, k), 1, w)
    return total


def check_offdiag_sum(parts, w, budget=None, seed=None):
    """Off-diagonal sum against ``[w]^2 ||f||_{1,w}``.

    The ratio is tracked against ``budget``; only a non-finite sum is a hard failure.
    """
    grid = parts.grid
    budget = 5**grid.d * 2 ** (grid.d + 2) if budget is None else budget
    lhs = offdiag_sum(parts, w)
    rhs = w.a1**2 * lp_norm(parts.f, 1, w)
    finite = math.isfinite(lhs)
    ok = finite and lhs <= budget * rhs
    return CheckReport("offdiag_sum", lhs, rhs, "pass" if ok else "fail", budget=budget,
                       hard=not finite, seed=seed, lam=parts.lam, grid=grid)
