"""Suite configuration and execution: every check on a batch of seeded instances."""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
import json
import math
import os

import numpy as np

from . import io as instance_io
from .cz import NormalizationError, cz_decompose, default_lambda
from .field import MatrixField, distribution
from .grid import GridSpec
from .instances import generate
from .operators import SignSample, linearize, square_function_terms
from .report import CheckReport, to_csv
from .seqnorms import OptimizerSettings, rc_norm, weak_rc_quasinorm
from .verify.cz_checks import (
    cadilhac_family,
    check_bd_vanishing,
    check_cuculescu,
    check_cz_proposition,
    check_zeta,
)
from .verify.decay import check_main_lemma, check_offdiag_sum
from .verify.orthogonality import bd_instance, check_almost_orthogonality
from .verify.square import (
    check_good_part,
    check_refinement,
    check_strong_pp,
    check_weak11,
    weak11_ratio,
)
from .weights import parse_weight_spec


class ConfigError(ValueError):
    """A suite configuration is missing, malformed or inconsistent."""


@dataclass(frozen=True)
class SuiteConfig:
    d: int = 1
    J: int = 4
    m: int = 3
    weight: str = "random-A1:cap=4"
    instances: int = 100
    R: int = 64
    signs: str = "random"
    seed: int = 0
    lambda_scale: float = 1.0
    lam: float = None
    sweep_points: int = 16
    budget_weak11: float = 64.0
    budget_offdiag: float = None
    budget_good_l2: float = 16.0
    budget_good_weak: float = 16.0
    delta_samples: int = 1000
    refinement: bool = True
    rc_iterations: int = 100
    instance: str = None
    witness_dir: str = None

    def validate(self):
        try:
            GridSpec(self.d, self.J, self.m)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.J < 2:
            raise ConfigError("J must be at least 2 for the decay checks")
        if self.instances < 1 or self.R < 1:
            raise ConfigError("instances and R must be positive")
        if self.signs not in ("random", "exhaustive"):
            raise ConfigError("signs must be 'random' or 'exhaustive'")
        if self.signs == "exhaustive" and self.J > 4:
            raise ConfigError("exhaustive signs need J <= 4")
        if not self.lambda_scale >= 1:
            raise ConfigError("lambda_scale must be >= 1 (the default level is the smallest normalised one)")
        if self.lam is not None and not self.lam > 0:
            raise ConfigError("lambda must be positive")
        if self.sweep_points < 8:
            raise ConfigError("sweep_points must be at least 8")
        if self.delta_samples < 100:
            raise ConfigError("delta_samples must be at least 100")
        try:
            parse_weight_spec(self.weight)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return self

    @property
    def grid(self):
        return GridSpec(self.d, self.J, self.m)


_ALIASES = {"lambda": "lam", "N": "instances"}


def _coerce(name, text):
    kind = {f.name: f.type for f in fields(SuiteConfig)}[name]
    kind = getattr(kind, "__name__", kind)
    if text.lower() in ("none", ""):
        return None
    if kind == "int":
        return int(text)
    if kind == "float":
        return float(text)
    if kind == "bool":
        if text.lower() in ("1", "true", "yes", "on"):
            return True
        if text.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {text!r}")
    return text


def parse_config(text, base=None):
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    known = {f.name for f in fields(SuiteConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, value = line.partition("=")
        key = _ALIASES.get(key.strip(), key.strip())
        if not eq:
            raise ConfigError(f"line {lineno}: expected key = value")
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = _coerce(key, value.strip())
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from exc
    return replace(base or SuiteConfig(), **values).validate()


def load_config(path, base=None):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, base)


def _signs(config, J, seed):
    if config.signs == "exhaustive" and J <= 4:
        return SignSample.enumerate_all(J)
    return SignSample.random(config.R, J, [0x516, seed])


def _random_h(grid, seed):
    rng = np.random.default_rng([0x4A, seed])
    shape = (grid.ncells, grid.m, grid.m)
    return MatrixField(grid, rng.normal(size=shape) + 1j * rng.normal(size=shape))


def load_instance(config):
    try:
        inst = instance_io.load(config.instance)
    except OSError as exc:
        raise ConfigError(f"cannot read instance {config.instance}: {exc}") from exc
    if inst.grid.J < 2:
        raise ConfigError("instance grid needs J >= 2 for the decay checks")
    if not inst.field.is_psd():
        raise ConfigError(f"instance {config.instance} holds a field that is not positive semidefinite")
    return inst


def make_instance(config, index):
    if config.instance is not None:
        return load_instance(config)
    return generate(config.grid, config.seed + index, config.weight)


def instance_level(config, inst):
    """Explicit config level, else the level stored with the instance, else the scaled default."""
    if config.lam is not None:
        return config.lam
    if inst.lam is not None:
        return inst.lam
    return default_lambda(inst.field) * config.lambda_scale


def run_instance(config, index):
    """All reports for instance ``index`` of the batch, in a fixed order."""
    inst = make_instance(config, index)
    f, w = inst.field, inst.weight
    grid = f.grid
    seed = inst.seed if inst.seed is not None else config.seed + index
    lam = instance_level(config, inst)
    parts = cz_decompose(f, lam)
    reports = []
    reports += check_cuculescu(f, lam, w, parts.cuculescu, seed)
    reports += check_cz_proposition(parts, seed)
    reports += check_zeta(parts, w, seed)
    reports += check_bd_vanishing(parts, seed)
    reports += cadilhac_family(parts.cuculescu, f, seed)
    reports.append(check_offdiag_sum(parts, w, config.budget_offdiag, seed))

    delta = w.delta(config.delta_samples, seed).delta
    h = _random_h(grid, seed)
    reports.append(check_main_lemma(h, 1, w, delta, seed=seed))
    reports.append(check_main_lemma(h, 2, w, delta, seed=seed))
    reports.append(check_main_lemma(f, 1, w, delta, positive=True, seed=seed))

    ao = bd_instance(parts, w, delta)
    rep = check_almost_orthogonality(ao, seed)
    rep.lam, rep.grid = lam, grid
    reports.append(rep)

    signs = _signs(config, grid.J, seed)
    reports += check_good_part(parts, w, signs, seed, config.budget_good_l2, config.budget_good_weak)
    weak = check_weak11(f, w, signs, config.sweep_points, config.budget_weak11, seed)
    reports += weak
    reports += _at_level(f, w, signs, lam, seed)
    if config.refinement and config.instance is None:
        fine_grid = GridSpec(grid.d, grid.J + 1, grid.m)
        fine = generate(fine_grid, seed, config.weight)
        fine_signs = _signs(config, fine_grid.J, seed)
        coarse_ratio = weak[0].ratio
        fine_ratio = weak11_ratio(fine.field, fine.weight, fine_signs, config.sweep_points)
        reports.append(check_refinement(coarse_ratio, fine_ratio, grid=grid, R=signs.R, seed=seed))
    for p in (1.5, 2, 3):
        reports += check_strong_pp(f, p, w, signs, seed)

    terms = square_function_terms(f)
    settings = OptimizerSettings(iterations=config.rc_iterations, seed=seed)
    for p in (1, 2):
        b = rc_norm(terms, p, w, settings)
        reports.append(_bracket_report(f"rc_bracket_p{p}", b, grid, seed))
    b = weak_rc_quasinorm(terms, w, settings)
    reports.append(_bracket_report("weak_rc_bracket", b, grid, seed))
    return reports


def _at_level(f, w, signs, lam, seed):
    dist = distribution(linearize(f, signs), lam, w)
    ctx = {"grid": f.grid, "R": signs.R, "seed": seed, "lam": lam}
    return [
        CheckReport("distribution_at_lambda", dist, 1.0, "pass", hard=False, **ctx),
        CheckReport("weak11_at_lambda", lam * dist, 1.0, "pass", hard=False, **ctx),
    ]


def _bracket_report(check_id, bracket, grid, seed):
    """``lower <= upper`` (up to ``1e-6`` relatively); the ratio column is ``lower / upper``."""
    ok = bracket.lower <= bracket.upper * (1 + 1e-6) + 1e-12
    return CheckReport(check_id, bracket.lower, bracket.upper, "pass" if ok else "fail", 1e-6,
                       grid=grid, seed=seed, extra={"converged": bracket.converged})


def _threads():
    cap = os.environ.get("NCSQ_THREADS")
    count = os.cpu_count() or 1
    if cap:
        try:
            count = min(count, max(1, int(cap)))
        except ValueError as exc:
            raise ConfigError(f"NCSQ_THREADS must be an integer, got {cap!r}") from exc
    return count


def _run_one(args):
    config, index = args
    return run_instance(config, index)


def run_suite(config, threads=None):
    """Reports of every instance, concatenated in instance order."""
    config.validate()
    if config.instance is not None:
        load_instance(config)
        count = 1
    else:
        count = config.instances
    threads = _threads() if threads is None else threads
    jobs = [(config, i) for i in range(count)]
    if threads <= 1 or count == 1:
        batches = [_run_one(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(threads, count)) as pool:
            batches = list(pool.map(_run_one, jobs))
    return [r for batch in batches for r in batch]


def summarize(reports):
    """Per check id: count, hard failures, hypothesis failures and the largest ratio."""
    out = {}
    for r in reports:
        s = out.setdefault(r.check_id, {"count": 0, "failures": 0, "hypothesis_failed": 0,
                                        "max_ratio": 0.0, "hard": r.hard})
        s["count"] += 1
        s["failures"] += int(r.failed)
        s["hypothesis_failed"] += int(r.status == "hypothesis-failed")
        ratio = r.ratio
        if math.isfinite(ratio):
            s["max_ratio"] = max(s["max_ratio"], ratio)
        else:
            s["max_ratio"] = repr(ratio)
    return dict(sorted(out.items()))


def summary_json(reports):
    summary = summarize(reports)
    doc = {"passed": not any(r.failed for r in reports), "checks": summary}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_witnesses(config, reports, directory):
    """Serialise the instance behind every hard failure; returns the written paths."""
    paths = []
    failed = sorted({r.seed for r in reports if r.failed and r.seed is not None})
    for seed in failed:
        path = os.path.join(directory, f"witness-{seed}.json")
        if config.instance is not None:
            inst = load_instance(config)
        else:
            inst = generate(config.grid, seed, config.weight)
        inst.lam = instance_level(config, inst)
        instance_io.dump(inst, path)
        for r in reports:
            if r.failed and r.seed == seed:
                r.witness = path
        paths.append(path)
    return paths


__all__ = [
    "ConfigError",
    "NormalizationError",
    "SuiteConfig",
    "load_config",
    "parse_config",
    "run_instance",
    "run_suite",
    "summarize",
    "summary_json",
    "to_csv",
    "write_witnesses",
]
