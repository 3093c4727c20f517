import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from detlab import algebra

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def square(n):
    return arrays(np.float64, (n, n), elements=finite)


def test_det_matches_laplace_expansion(rng):
    for n in (2, 3, 4, 5):
        A = rng.standard_normal((20, n, n))
        ref = np.array([algebra.cofactor_expansion_det(a) for a in A])
        assert np.allclose(algebra.det(A), ref, rtol=1e-12, atol=1e-12)


def test_cofactor_small_cases():
    A = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert np.array_equal(algebra.cofactor(A), [[4.0, -3.0], [-2.0, 1.0]])
    assert np.array_equal(algebra.cofactor(np.eye(3)), np.eye(3))
    # singular matrix: cofactor still defined and rank one
    S = np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 1.0, 1.0]])
    C = algebra.cofactor(S)
    assert np.linalg.matrix_rank(C) == 1
    assert np.allclose(S.T @ C, 0)


def test_cof_via_quarter_turn(rng):
    A = rng.standard_normal((100, 2, 2))
    assert np.max(np.abs(algebra.cof_via_J(A) - algebra.cofactor(A))) <= 1e-14
    with pytest.raises(ValueError):
        algebra.cof_via_J(np.eye(3))


def test_inner_and_wedge():
    A = np.arange(4.0).reshape(2, 2)
    assert algebra.inner(A, np.eye(2)) == 3.0
    assert algebra.wedge2([1, 0], [0, 1]) == 1.0
    assert algebra.wedge2([1, 2], [2, 4]) == 0.0
    with pytest.raises(ValueError):
        algebra.inner(np.eye(2), np.eye(3))


def test_input_validation():
    with pytest.raises(ValueError):
        algebra.det(np.ones((2, 3)))
    with pytest.raises(ValueError):
        algebra.det(np.array([[np.nan, 0.0], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        algebra.det(np.ones((1, 1)))


@pytest.mark.parametrize("n", [2, 3, 4])
@given(data=st.data())
def test_adjugate_identity_property(n, data):
    A = data.draw(square(n))
    scale = 1 + algebra.inf_norm(A) ** n
    assert algebra.identity_residual(A) <= 1e-12 * scale


@given(A=square(3), B=square(3))
def test_cofactor_is_multiplicative(A, B):
    lhs = algebra.cofactor(A @ B)
    rhs = algebra.cofactor(A) @ algebra.cofactor(B)
    scale = 1 + (algebra.inf_norm(A) * algebra.inf_norm(B)) ** 2
    assert np.max(np.abs(lhs - rhs)) <= 1e-11 * scale


@given(A=square(2))
def test_cof_inner_self_is_n_det(A):
    # cof X : X = n det X
    assert abs(algebra.inner(algebra.cofactor(A), A) - 2 * algebra.det(A)) <= 1e-12 * (1 + np.abs(A).max() ** 2)
