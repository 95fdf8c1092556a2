import numpy as np
import pytest

from ncsq import linalg
from ncsq.cz import (
    NormalizationError,
    cuculescu,
    cz_decompose,
    default_lambda,
    literal_projections,
    weighted_cuculescu_bound,
)
from ncsq.field import MatrixField, lp_norm, trace
from ncsq.grid import GridSpec
from ncsq.instances import generate, random_field
from ncsq.operators import cond_exp
from ncsq.weights import make_weight


def test_no_stopping_below_level():
    grid = GridSpec(1, 4, 3)
    f = MatrixField.identity(grid) * 0.5
    res = cuculescu(f, 1.0)
    assert np.allclose(res.q, np.eye(3))
    assert np.allclose(res.p, 0)
    parts = cz_decompose(f, 1.0)
    assert np.allclose(parts.g.values, f.values)
    assert np.allclose(parts.b_d.values, 0) and np.allclose(parts.b_off.values, 0)
    assert np.allclose(parts.zeta.values, np.eye(3))


def test_projections_decrease_and_commute_with_averages():
    grid = GridSpec(1, 4, 3)
    f = generate(grid, 2).field
    res = cuculescu(f, default_lambda(f))
    for n in range(1, grid.J + 1):
        q, prev = res.q[n], res.q[n - 1]
        assert np.abs(q @ prev - q).max() <= 1e-10
        assert np.abs(q @ q - q).max() <= 1e-10
        qc = cond_exp(res.q_field(n), n).values
        assert np.abs(qc - q).max() <= 1e-10
        fn = cond_exp(f, n).values
        top = np.max(linalg.eigvalsh(q @ fn @ q))
        assert top <= res.lam * (1 + 1e-8)


def test_stopping_happens_on_generated_instances():
    grid = GridSpec(1, 4, 3)
    stopped = 0
    for seed in range(5):
        f = generate(grid, seed).field
        res = cuculescu(f, default_lambda(f))
        stopped += sum(res.stopped(n).any() for n in range(1, grid.J + 1))
    assert stopped > 0


def test_scalar_off_diagonal_part_vanishes():
    grid = GridSpec(1, 5, 1)
    for seed in range(4):
        f = random_field(grid, seed)
        parts = cz_decompose(f, default_lambda(f))
        assert np.all(parts.b_off.values == 0)


def test_default_lambda_is_normalised():
    grid = GridSpec(2, 2, 3)
    for seed in range(5):
        f = random_field(grid, seed)
        lam = default_lambda(f)
        root = cond_exp(f, 0).values[0]
        assert np.max(linalg.eigvalsh(root)) <= lam * (1 + 1e-12)


def test_input_validation():
    grid = GridSpec(1, 3, 2)
    f = MatrixField.identity(grid) * 3.0
    with pytest.raises(NormalizationError) as info:
        cuculescu(f, 1.0)
    assert "cell" in str(info.value)
    with pytest.raises(ValueError):
        cuculescu(f, 0.0)
    bad = MatrixField.identity(grid) * -1.0
    with pytest.raises(ValueError):
        cuculescu(bad, 1.0)


def test_restricted_kernel_matches_literal_for_strictly_positive_field():
    grid = GridSpec(1, 4, 3)
    f = generate(grid, 4).field + MatrixField.identity(grid) * 0.5
    lam = default_lambda(f)
    assert np.abs(cuculescu(f, lam).q - literal_projections(f, lam)).max() <= 1e-9


def test_regularize_removes_kernel_ambiguity():
    grid = GridSpec(1, 3, 2)
    values = np.zeros((grid.ncells, 2, 2))
    values[:, 0, 0] = np.linspace(0.1, 4.0, grid.ncells)
    f = MatrixField(grid, values)
    lam = default_lambda(f)
    restricted = cuculescu(f, lam).q
    regular = cuculescu(f, lam, regularize=True).q
    assert np.abs(restricted - regular).max() <= 1e-8
    # the verbatim half-open interval drops the kernel direction at once
    assert np.abs(literal_projections(f, lam)[1][:, 1, 1]).max() <= 1e-12


def test_weighted_bound_reduces_to_unweighted_for_unit_weight():
    grid = GridSpec(1, 4, 3)
    f = generate(grid, 1).field
    res = cuculescu(f, default_lambda(f))
    rep = weighted_cuculescu_bound(res, f, make_weight(grid, "constant"))
    assert rep.status == "pass"
    mass = trace(MatrixField(grid, np.eye(3) - res.q_final)).real
    assert rep.lhs == pytest.approx(res.lam * mass)
    assert rep.rhs == pytest.approx(lp_norm(f, 1))


@pytest.mark.parametrize("a", [8.0, 50.0])
def test_weighted_bound_with_large_two_level_constant(a):
    grid = GridSpec(1, 4, 3)
    w = make_weight(grid, "two-level", a=a, b=1.0)
    for seed in range(5):
        f = generate(grid, seed).field
        res = cuculescu(f, default_lambda(f))
        rep = weighted_cuculescu_bound(res, f, w)
        assert rep.status == "pass"
        assert rep.ratio <= 1


def test_zeta_is_projection_and_kills_stopped_cubes():
    grid = GridSpec(1, 4, 3)
    f = generate(grid, 3).field
    parts = cz_decompose(f, default_lambda(f))
    z = parts.zeta.values
    assert np.abs(z @ z - z).max() <= 1e-10
    for n in range(1, grid.J + 1):
        assert np.abs(parts.cuculescu.p[n] @ z).max() <= 1e-9
