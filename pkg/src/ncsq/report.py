"""Check reports and their CSV serialisation."""
from dataclasses import dataclass, field
import csv
import io
import math

CSV_COLUMNS = ("check_id", "seed", "d", "J", "m", "R", "lambda", "lhs", "rhs", "ratio", "budget", "pass")


@dataclass
class CheckReport:
    """Outcome of one numerical check: ``lhs`` measured against ``rhs``.

    ``status`` is ``"pass"``, ``"fail"`` or ``"hypothesis-failed"`` (the
    last one for hypothesis-gated lemmas whose premises do not hold, which is
    never a failure of the lemma).  ``hard`` marks checks that decide the
    exit code; the others only track a measured constant against a budget.
    """

    check_id: str
    lhs: float
    rhs: float
    status: str = "pass"
    tol: float = 0.0
    budget: float = math.nan
    hard: bool = True
    seed: object = None
    lam: float = math.nan
    grid: object = None
    R: object = None
    witness: object = None
    extra: dict = field(default_factory=dict)

    @property
    def ratio(self):
        if self.rhs == 0:
            return 0.0 if self.lhs == 0 else math.inf
        return self.lhs / self.rhs

    @property
    def passed(self):
        return self.status != "fail"

    @property
    def failed(self):
        return self.hard and self.status == "fail"

    def row(self):
        g = self.grid
        mark = {"pass": "1", "fail": "0"}.get(self.status, "hyp")
        return [
            self.check_id,
            "" if self.seed is None else str(self.seed),
            "" if g is None else str(g.d),
            "" if g is None else str(g.J),
            "" if g is None else str(g.m),
            "" if self.R is None else str(self.R),
            _num(self.lam),
            _num(self.lhs),
            _num(self.rhs),
            _num(self.ratio),
            _num(self.budget),
            mark,
        ]


def _num(x):
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return repr(x)


def inequality(check_id, lhs, rhs, tol=1e-9, **kwargs):
    """Report for ``lhs <= rhs * (1 + tol)``."""
    lhs, rhs = float(lhs), float(rhs)
    ok = math.isfinite(lhs) and lhs <= rhs * (1 + tol) + (tol if rhs == 0 else 0.0)
    return CheckReport(check_id, lhs, rhs, "pass" if ok else "fail", tol, **kwargs)


def vanishing(check_id, residual, scale=1.0, tol=1e-9, **kwargs):
    """Report for ``residual <= tol * scale`` (identities that must hold exactly)."""
    residual = float(residual)
    bound = tol * max(1.0, float(scale))
    ok = math.isfinite(residual) and residual <= bound
    return CheckReport(check_id, residual, bound, "pass" if ok else "fail", tol, **kwargs)


def to_csv(reports, extra_columns=()):
    """CSV text with one row per report; ``extra_columns`` are ``(name, value)`` prepended."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([name for name, _ in extra_columns] + list(CSV_COLUMNS))
    prefix = [str(value) for _, value in extra_columns]
    for r in reports:
        writer.writerow(prefix + r.row())
    return buf.getvalue()
