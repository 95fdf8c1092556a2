import numpy as np
import pytest

from ncsq.field import MatrixField, distribution, inner, lp_norm, trace, weak_l1_quasinorm
from ncsq.grid import GridSpec, cube_masks
from ncsq.weights import make_weight


def random_field(grid, seed):
    rng = np.random.default_rng(seed)
    shape = (grid.ncells, grid.m, grid.m)
    return MatrixField(grid, rng.normal(size=shape) + 1j * rng.normal(size=shape))


def test_trace_examples():
    grid = GridSpec(1, 3, 2)
    assert trace(MatrixField.identity(grid)) == pytest.approx(2)
    g2 = GridSpec(2, 3, 3)
    mask = cube_masks(g2, 1)[2]
    f = MatrixField.from_scalar(g2, mask.astype(float)) @ MatrixField.identity(g2)
    assert trace(f).real == pytest.approx(3 * 2.0**-2)


def test_trace_weighted_double_sum():
    grid = GridSpec(1, 3, 3)
    f = random_field(grid, 0)
    w = make_weight(grid, "random-A1", cap=4, seed=2)
    expected = 0.0
    for x in range(grid.ncells):
        for i in range(grid.m):
            expected += f.values[x, i, i] * w.values[x] / grid.ncells
    assert trace(f, w) == pytest.approx(expected, rel=1e-12)


def test_lp_norm_examples():
    grid = GridSpec(1, 3, 3)
    assert lp_norm(MatrixField.identity(grid) * 2.5, 1) == pytest.approx(7.5)
    p = MatrixField.from_scalar(grid, (np.arange(8) < 3).astype(float)) @ MatrixField.identity(grid)
    assert lp_norm(p, np.inf) == 1.0
    with pytest.raises(ValueError):
        lp_norm(p, 0.5)


def test_holder_on_random_pairs():
    grid = GridSpec(1, 3, 2)
    w = make_weight(grid, "power", alpha=0.5)
    for seed in range(10):
        f, g = random_field(grid, seed), random_field(grid, seed + 100)
        for p in (1.5, 2, 3):
            q = p / (p - 1)
            assert abs(trace(f @ g, w)) <= lp_norm(f, p, w) * lp_norm(g, q, w) * (1 + 1e-12)


def test_distribution_examples():
    grid = GridSpec(1, 3, 3)
    f = MatrixField.identity(grid) * 2.0
    assert distribution(f, 2.0) == 0
    assert distribution(f, 1.5) == pytest.approx(3)
    with pytest.raises(ValueError):
        distribution(f, 0.0)


def test_distribution_eigencount_oracle():
    grid = GridSpec(2, 2, 3)
    f = random_field(grid, 4)
    w = make_weight(grid, "random-A1", cap=3, seed=1)
    lam = 1.7
    expected = 0.0
    for x in range(grid.ncells):
        s = np.linalg.svd(f.values[x], compute_uv=False)
        expected += np.count_nonzero(s > lam) * w.values[x] / grid.ncells
    assert distribution(f, lam, w) == pytest.approx(expected, rel=1e-12)


def test_distribution_averages_sample_axis():
    grid = GridSpec(1, 2, 1)
    values = np.zeros((2, 4, 1, 1))
    values[0, :, 0, 0] = 3.0
    f = MatrixField(grid, values)
    assert distribution(f, 1.0) == pytest.approx(0.5)


def test_weak_l1_examples():
    grid = GridSpec(1, 3, 3)
    assert weak_l1_quasinorm(MatrixField.identity(grid) * 1.5) == pytest.approx(4.5)
    assert weak_l1_quasinorm(MatrixField.zeros(grid)) == 0.0


def test_weak_l1_matches_dense_level_scan():
    grid = GridSpec(1, 3, 2)
    f = random_field(grid, 8)
    w = make_weight(grid, "two-level", a=3, b=1)
    sv = np.linalg.svd(f.values, compute_uv=False).ravel()
    levels = np.concatenate([sv * (1 - 1e-12), np.linspace(1e-3, sv.max(), 500)])
    scan = max(lam * distribution(f, lam, w) for lam in levels if lam > 0)
    value = weak_l1_quasinorm(f, w)
    assert scan <= value * (1 + 1e-12)
    assert value <= scan * (1 + 1e-9)
    assert value <= lp_norm(f, 1, w) * (1 + 1e-12)


def test_inner_is_trace_of_product():
    grid = GridSpec(1, 2, 2)
    f, g = random_field(grid, 1), random_field(grid, 2)
    assert inner(f, g) == pytest.approx(trace(f @ g.adjoint()))


def test_field_arithmetic_and_validation():
    grid = GridSpec(1, 2, 2)
    f = random_field(grid, 3)
    assert np.allclose((f + f - f * 2).values, 0)
    assert np.allclose((f / 2).values, f.values / 2)
    assert f.adjoint().adjoint().values.tolist() == f.values.tolist()
    with pytest.raises(ValueError):
        MatrixField(grid, np.zeros((3, 2, 2)))
    h = f @ f.adjoint()
    assert h.is_hermitian() and h.is_psd()
