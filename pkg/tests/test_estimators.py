import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from ncsq import CZDecomposition, SquareFunction, check_matrix_field
from ncsq.field import MatrixField
from ncsq.grid import GridSpec
from ncsq.instances import random_field
from ncsq.operators import SignSample, linearize


@pytest.fixture
def field():
    return random_field(GridSpec(1, 4, 3), 2)


def test_check_matrix_field_infers_depth():
    assert check_matrix_field(np.zeros((16, 2, 2))).grid == GridSpec(1, 4, 2)
    assert check_matrix_field(np.zeros((64, 1, 1)), d=2).grid == GridSpec(2, 3, 1)
    with pytest.raises(ValueError):
        check_matrix_field(np.zeros((12, 2, 2)))
    with pytest.raises(ValueError):
        check_matrix_field(np.zeros((16, 2, 3)))
    with pytest.raises(ValueError):
        check_matrix_field(np.zeros((8, 1, 1)), d=2)
    with pytest.raises(ValueError):
        check_matrix_field(MatrixField.zeros(GridSpec(1, 2, 1)), d=2)


def test_cz_decomposition_fit_transform(field):
    est = CZDecomposition()
    parts = est.fit_transform(field.values)
    assert parts.shape == (3, 16, 3, 3)
    assert np.abs(parts.sum(axis=0) - field.values).max() <= 1e-10
    assert est.lam_ > 0
    assert est.q_.shape == (5, 16, 3, 3) and est.p_.shape == (5, 16, 3, 3)
    assert est.zeta_.shape == (16, 3, 3)


def test_cz_decomposition_params_and_clone(field):
    est = CZDecomposition(lam=50.0)
    assert est.get_params() == {"lam": 50.0, "regularize": False, "d": 1}
    copy = clone(est).set_params(regularize=True)
    assert copy.regularize and not est.regularize
    parts = copy.fit(field).transform(field)
    assert np.allclose(parts[0], field.values)


def test_transform_on_new_field_recomputes(field):
    est = CZDecomposition().fit(field)
    other = random_field(field.grid, 7)
    parts = est.transform(other.values)
    assert np.abs(parts.sum(axis=0) - other.values).max() <= 1e-10


def test_unfitted_and_mismatched(field):
    with pytest.raises(NotFittedError):
        CZDecomposition().transform(field)
    est = CZDecomposition().fit(field)
    with pytest.raises(ValueError):
        est.transform(np.zeros((8, 3, 3)))


def test_square_function_exhaustive(field):
    sq = SquareFunction(signs="exhaustive").fit(field)
    out = sq.transform(field)
    assert out.shape == (32, 16, 3, 3)
    assert np.allclose(out, linearize(field, SignSample.enumerate_all(4)).values)


def test_square_function_random_is_reproducible(field):
    a = SquareFunction(n_samples=5, random_state=3).fit_transform(field.values)
    b = SquareFunction(n_samples=5, random_state=3).fit_transform(field.values)
    assert a.shape == (5, 16, 3, 3)
    assert np.array_equal(a, b)
    with pytest.raises(ValueError):
        SquareFunction(signs="gaussian").fit(field)
    with pytest.raises(NotFittedError):
        SquareFunction().transform(field)
