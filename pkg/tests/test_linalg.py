import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from pebodrem.errors import DimensionError, NumericalFailure
from pebodrem.linalg import adjugate, determinant, rk4_step


def leibniz_det(M):
    """Brute-force determinant by summing over permutations."""
    n = len(M)
    total = 0.0
    for perm in itertools.permutations(range(n)):
        inversions = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        prod = 1.0
        for i, j in enumerate(perm):
            prod *= M[i][j]
        total += -prod if inversions % 2 else prod
    return total


def square(max_n=6):
    return st.integers(1, max_n).flatmap(
        lambda n: arrays(float, (n, n), elements=st.floats(-10, 10, allow_nan=False, width=64))
    )


def test_determinant_examples():
    assert determinant([[5.0]]) == 5.0
    assert determinant(np.eye(3)) == 1.0
    assert determinant([[1.0, 2.0], [2.0, 4.0]]) == 0.0


def test_determinant_rejects_non_square():
    with pytest.raises(DimensionError):
        determinant(np.ones((2, 3)))
    with pytest.raises(DimensionError):
        adjugate(np.ones((3, 2)))


@pytest.mark.parametrize("n", range(1, 7))
def test_determinant_matches_permutation_sum(n, rng):
    for _ in range(5):
        M = rng.normal(size=(n, n))
        assert determinant(M) == pytest.approx(leibniz_det(M.tolist()), rel=1e-10, abs=1e-12)


def test_determinant_batched(rng):
    M = rng.normal(size=(3, 4, 5, 5))
    out = determinant(M)
    assert out.shape == (3, 4)
    assert out[1, 2] == pytest.approx(determinant(M[1, 2]), rel=1e-13)


def test_zero_pivot_gives_zero():
    M = np.zeros((5, 5))
    M[1:, 1:] = np.eye(4)
    assert determinant(M) == 0.0


def test_adjugate_examples():
    np.testing.assert_array_equal(adjugate([[7.0]]), [[1.0]])
    a, b, c, d = 2.0, -3.0, 5.0, 11.0
    np.testing.assert_array_equal(adjugate([[a, b], [c, d]]), [[d, -b], [-c, a]])
    S = np.array([[1.0, 2.0], [2.0, 4.0]])
    np.testing.assert_array_equal(adjugate(S) @ S, np.zeros((2, 2)))


def test_adjugate_of_integer_singular_matrix_is_exact():
    M = np.array([[1, 2, 3, 4, 5], [2, 4, 6, 8, 10], [0, 1, 0, 1, 0], [3, 1, 4, 1, 5], [9, 2, 6, 5, 3]], float)
    np.testing.assert_array_equal(adjugate(M) @ M, np.zeros((5, 5)))
    assert determinant(M) == 0.0


@settings(max_examples=200, deadline=None)
@given(square())
def test_adjugate_identity(M):
    n = M.shape[0]
    adj = adjugate(M)
    scale = max(1.0, np.abs(adj).max() * np.abs(M).max() * n)
    np.testing.assert_allclose(adj @ M, determinant(M) * np.eye(n), atol=1e-10 * scale)


@settings(max_examples=200, deadline=None)
@given(square(), st.floats(-3, 3))
def test_determinant_transpose_and_scaling(M, c):
    n = M.shape[0]
    scale = max(1.0, np.abs(M).max()) ** n * math.factorial(n)
    assert determinant(M.T) == pytest.approx(determinant(M), abs=1e-12 * scale)
    assert determinant(c * M) == pytest.approx(c ** n * determinant(M), abs=1e-12 * scale * max(1, abs(c)) ** n)


def test_rk4_zero_field_and_constant_field():
    s = np.array([1.5, -2.0])
    np.testing.assert_array_equal(rk4_step(lambda t, x: np.zeros_like(x), 0.0, s, 0.3), s)
    assert rk4_step(lambda t, x: np.ones_like(x), 0.0, np.array([0.0]), 0.5)[0] == 0.5


def test_rk4_decay_step():
    # stages by hand: k1=-1, k2=-0.95, k3=-0.9525, k4=-0.90475
    x = rk4_step(lambda t, x: -x, 0.0, np.array([1.0]), 0.1)[0]
    assert x == pytest.approx(1 + 0.1 / 6 * (-1 - 2 * 0.95 - 2 * 0.9525 - 0.90475), abs=1e-15)
    assert x == pytest.approx(0.90483750, abs=5e-9)
    assert abs(x - math.exp(-0.1)) < 1e-7


def test_rk4_global_order_is_four():
    lam = -1.3

    def solve(h):
        x = np.array([1.0])
        for i in range(int(round(2.0 / h))):
            x = rk4_step(lambda t, s: lam * s, i * h, x, h)
        return abs(x[0] - math.exp(lam * 2.0))

    e1, e2 = solve(0.02), solve(0.01)
    assert math.log2(e1 / e2) == pytest.approx(4.0, abs=0.1)


def test_rk4_stage_inputs_are_passed_in_order():
    seen = []

    def f(t, s, u):
        seen.append((t, u))
        return np.zeros_like(s)

    rk4_step(f, 1.0, np.zeros(1), 0.5, inputs=("a", "b", "c", "d"))
    assert seen == [(1.0, "a"), (1.25, "b"), (1.25, "c"), (1.5, "d")]


def test_rk4_non_finite_derivative_reports_time():
    with pytest.raises(NumericalFailure) as info:
        rk4_step(lambda t, s: np.full_like(s, np.inf) if t > 0 else s, 0.0, np.ones(1), 0.1)
    assert info.value.t == pytest.approx(0.05)
