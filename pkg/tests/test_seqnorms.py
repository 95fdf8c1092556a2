import numpy as np
import pytest

from ncsq.field import MatrixField, lp_norm, weak_l1_quasinorm
from ncsq.grid import GridSpec
from ncsq.operators import SignSample
from ncsq.seqnorms import (
    OptimizerSettings,
    column_norm,
    randomized_norm,
    rc_norm,
    row_norm,
    weak_rc_quasinorm,
)
from ncsq.weights import make_weight

FAST = OptimizerSettings(iterations=150)


def random_field(grid, seed, hermitian=False):
    rng = np.random.default_rng(seed)
    shape = (grid.ncells, grid.m, grid.m)
    a = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    if hermitian:
        a = a + np.conj(np.swapaxes(a, -1, -2))
    return MatrixField(grid, a)


def test_single_element_column_and_row():
    grid = GridSpec(1, 3, 3)
    f = random_field(grid, 0)
    w = make_weight(grid, "power", alpha=0.5)
    for p in (1, 1.5, 2, 4):
        assert column_norm([f], p, w) == pytest.approx(lp_norm(f, p, w), rel=1e-10)
        assert row_norm([f], p, w) == pytest.approx(lp_norm(f, p, w), rel=1e-10)


def test_disjoint_scalar_sequence_matches_l2_combination():
    grid = GridSpec(1, 3, 1)
    rng = np.random.default_rng(1)
    a, b = rng.normal(size=8), rng.normal(size=8)
    a[4:], b[:4] = 0, 0
    a[1], b[6] = 0.3, -2.0
    seq = [MatrixField.from_scalar(grid, a), MatrixField.from_scalar(grid, b)]
    for p in (1, 2, 3):
        expected = (np.sum(np.sqrt(a**2 + b**2) ** p) / 8) ** (1 / p)
        assert column_norm(seq, p) == pytest.approx(expected, rel=1e-10)


def test_row_equals_column_for_hermitian_sequences():
    grid = GridSpec(1, 3, 3)
    seq = [random_field(grid, s, hermitian=True) for s in range(3)]
    for p in (1, 2, 3):
        assert row_norm(seq, p) == pytest.approx(column_norm(seq, p), rel=1e-10)


def test_p2_bracket_is_degenerate():
    grid = GridSpec(1, 3, 2)
    seq = [random_field(grid, s) for s in range(4)]
    b = rc_norm(seq, 2)
    assert b.lower == b.upper
    expected = np.sqrt(sum(lp_norm(f, 2) ** 2 for f in seq))
    assert b.upper == pytest.approx(expected, rel=1e-10)
    assert b.converged


@pytest.mark.parametrize("p", [1, 1.5])
def test_bracket_ordered_and_below_column_and_row(p):
    grid = GridSpec(1, 3, 2)
    w = make_weight(grid, "random-A1", cap=4, seed=2)
    seq = [random_field(grid, s) for s in range(3)]
    b = rc_norm(seq, p, w, FAST)
    assert b.lower <= b.upper * (1 + 1e-6)
    assert b.upper <= min(column_norm(seq, p, w), row_norm(seq, p, w)) * (1 + 1e-12)
    assert b.gap >= -1e-6 * b.upper


def test_rc_norm_rejects_bad_exponent():
    grid = GridSpec(1, 2, 1)
    with pytest.raises(ValueError):
        rc_norm([random_field(grid, 0)], 0.5)


def test_weak_rc_examples():
    grid = GridSpec(1, 3, 2)
    zero = MatrixField.zeros(grid)
    b = weak_rc_quasinorm([zero, zero])
    assert (b.lower, b.upper) == (0.0, 0.0)
    f = random_field(grid, 3, hermitian=True)
    b = weak_rc_quasinorm([f], settings=FAST)
    assert b.upper == pytest.approx(weak_l1_quasinorm(f), rel=1e-10)
    assert b.lower >= b.upper / 2 * (1 - 1e-12)


def test_randomized_norm_exhaustive_p2_equals_column_norm():
    grid = GridSpec(1, 2, 2)
    seq = [random_field(grid, s) for s in range(3)]
    signs = SignSample.enumerate_all(2)
    value = randomized_norm(seq, 2, signs=signs)
    assert value == pytest.approx(column_norm(seq, 2), rel=1e-10)
