import numpy as np
import pytest
from hypothesis import given, strategies as st

from maxcosine.numerics import (
    gradient_check,
    make_rng,
    matvec,
    sigmoid,
    sigmoid_grad,
    softmax,
    tanh_grad,
)

finite_floats = st.floats(min_value=-50, max_value=50, allow_nan=False)


def test_matvec_identity():
    assert np.allclose(matvec(np.eye(3), np.array([1.0, 2.0, 3.0])), [1, 2, 3])


def test_matvec_zero():
    assert np.all(matvec(np.zeros((2, 3)), np.array([4.0, 5.0, 6.0])) == 0)


def test_matvec_hand_example():
    got = matvec(np.array([[1.0, 2.0], [3.0, 4.0]]), np.array([1.0, 1.0]))
    assert np.allclose(got, [3.0, 7.0])


def test_matvec_dimension_mismatch():
    with pytest.raises(ValueError):
        matvec(np.eye(3), np.array([1.0, 2.0]))


def test_matvec_linearity():
    rng = make_rng(0)
    w = rng.standard_normal((4, 5))
    u, v = rng.standard_normal(5), rng.standard_normal(5)
    lhs = matvec(w, 2.0 * u + 3.0 * v)
    rhs = 2.0 * matvec(w, u) + 3.0 * matvec(w, v)
    assert np.max(np.abs(lhs - rhs)) < 1e-10


def test_sigmoid_tanh_at_zero():
    assert sigmoid(0.0) == 0.5
    assert np.tanh(0.0) == 0.0
    assert sigmoid_grad(sigmoid(0.0)) == 0.25


@given(finite_floats)
def test_sigmoid_symmetry(x):
    assert sigmoid(-x) == pytest.approx(1.0 - sigmoid(x), abs=1e-12)


def test_sigmoid_saturates():
    assert sigmoid(1e6) == 1.0
    assert 0.0 <= sigmoid(-1e6) < 1e-25
    assert np.isfinite(sigmoid(1e308)) and np.isfinite(sigmoid(-1e308))


def test_tanh_grad_matches_definition():
    t = np.tanh(0.7)
    assert tanh_grad(t) == pytest.approx(1.0 - t * t)


def test_softmax_uniform():
    assert np.allclose(softmax(np.zeros(3)), np.full(3, 1 / 3))


def test_softmax_hand_example():
    p = np.log([1.0, 2.0, 3.0])
    assert np.allclose(softmax(p), [1 / 6, 2 / 6, 3 / 6], atol=1e-12)


@given(st.lists(finite_floats, min_size=2, max_size=6), finite_floats)
def test_softmax_shift_invariance(values, shift):
    p = np.array(values)
    assert np.max(np.abs(softmax(p + shift) - softmax(p))) < 1e-12


def test_softmax_contract():
    rng = make_rng(3)
    for _ in range(100):
        p = rng.standard_normal(3) * 10
        out = softmax(p)
        assert np.all(out > 0) and np.all(out < 1)
        assert abs(out.sum() - 1.0) < 1e-12
        assert np.argmax(out) == np.argmax(p)


def test_gradient_check_quadratic():
    err = gradient_check(lambda t: float(t[0] ** 2), np.array([3.0]), np.array([6.0]), h=1e-5)
    assert err < 1e-9


def test_gradient_check_constant():
    err = gradient_check(lambda t: 1.0, np.array([0.3, -0.7]), np.zeros(2), h=1e-5)
    assert err == 0.0


def test_gradient_check_rejects_nonfinite():
    with pytest.raises(FloatingPointError):
        gradient_check(lambda t: float("nan"), np.array([1.0]), np.array([0.0]))


def test_rng_reproducibility():
    a = make_rng(12345).random(10**6)
    b = make_rng(12345).random(10**6)
    assert np.array_equal(a, b)


def test_rng_distinct_seeds_differ():
    assert not np.array_equal(make_rng(1).random(100), make_rng(2).random(100))
