import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from graph_al.numerics import (AdamState, adam_step, cross_entropy, finite_diff_check, matmul, relu,
                               relu_backward, row_softmax, spmm)


def test_spmm_examples():
    d = np.arange(6.0).reshape(3, 2)
    np.testing.assert_array_equal(spmm(sp.identity(3, format="csr"), d), d)
    np.testing.assert_array_equal(spmm(sp.csr_matrix((3, 3)), d), np.zeros((3, 2)))
    s = sp.csr_matrix([[0.5, 0.5], [0.5, 0.5]])
    np.testing.assert_array_equal(spmm(s, np.array([[1.0], [3.0]])), [[2.0], [2.0]])
    with pytest.raises(ValueError):
        spmm(s, np.ones((3, 1)))


@pytest.mark.parametrize("seed", range(10))
def test_spmm_matches_dense(seed):
    rng = np.random.default_rng(seed)
    # integer entries keep every partial sum exact, so summation order cannot matter
    dense = np.where(rng.random((10, 10)) < 0.3, rng.integers(-5, 6, size=(10, 10)), 0).astype(float)
    d = rng.integers(-9, 10, size=(10, 4)).astype(float)
    np.testing.assert_array_equal(spmm(sp.csr_matrix(dense), d), dense @ d)


def test_matmul_examples():
    b = np.arange(6.0).reshape(2, 3)
    np.testing.assert_array_equal(matmul(np.eye(2), b), b)
    np.testing.assert_array_equal(matmul(b, np.eye(3)), b)
    np.testing.assert_array_equal(matmul(np.array([[1.0, 2.0]]), np.array([[3.0], [4.0]])), [[11.0]])
    with pytest.raises(ValueError):
        matmul(b, b)


def test_relu_examples():
    np.testing.assert_array_equal(relu(-np.ones((2, 2))), np.zeros((2, 2)))
    x = np.array([[1.0, 2.5]])
    np.testing.assert_array_equal(relu(x), x)
    np.testing.assert_array_equal(relu_backward(np.array([[-1.0, 2.0]]), np.array([[5.0, 5.0]])), [[0.0, 5.0]])
    assert relu_backward(np.zeros((1, 1)), np.ones((1, 1)))[0, 0] == 0.0


def test_relu_backward_matches_finite_differences():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(5, 5))
    x = np.where(np.abs(x) < 1e-3, 0.5, x)
    params = {"x": x}
    err = finite_diff_check(lambda p: (relu(p["x"]).sum(), {"x": relu_backward(p["x"], np.ones_like(p["x"]))}),
                            params, 1e-6)
    assert err < 1e-9


def test_row_softmax_examples():
    np.testing.assert_allclose(row_softmax(np.full((1, 5), 3.0)), np.full((1, 5), 0.2), atol=1e-15)
    np.testing.assert_allclose(row_softmax(np.array([[0.0, np.log(3.0)]])), [[0.25, 0.75]], atol=1e-15)
    np.testing.assert_array_equal(row_softmax(np.array([[3.0], [-7.0]])), [[1.0], [1.0]])


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, (4, 6), elements=st.floats(-50, 50)), st.floats(-100, 100))
def test_row_softmax_properties(m, c):
    p = row_softmax(m)
    np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-12)
    np.testing.assert_allclose(row_softmax(m + c), p, atol=1e-12)


def test_cross_entropy_examples():
    labels = np.array([0, 1, 2])
    loss, _ = cross_entropy(np.eye(3), labels, [0, 1, 2])
    assert loss == pytest.approx(0.0, abs=1e-11)
    loss, _ = cross_entropy(np.full((2, 4), 0.25), np.array([0, 3]), [0, 1])
    assert loss == pytest.approx(np.log(4), abs=1e-10)
    loss, grad = cross_entropy(np.array([[0.25, 0.75]]), np.array([1]), [0])
    np.testing.assert_allclose(grad, [[0.25, -0.25]])
    with pytest.raises(ValueError, match="no labeled nodes"):
        cross_entropy(np.eye(3), labels, [])


def test_cross_entropy_gradient_wrt_logits():
    rng = np.random.default_rng(1)
    labels = rng.integers(3, size=6)
    subset = [0, 2, 3]

    def f(p):
        loss, g = cross_entropy(row_softmax(p["z"]), labels, subset)
        return loss, {"z": g}

    assert finite_diff_check(f, {"z": rng.normal(size=(6, 3))}) < 1e-6


def test_adam_zero_gradient_no_decay():
    p = {"w": np.array([1.0, -2.0])}
    st_ = AdamState(lr=0.1)
    adam_step(p, {"w": np.zeros(2)}, st_)
    np.testing.assert_array_equal(p["w"], [1.0, -2.0])
    assert st_.t == 1
    adam_step(p, {"w": np.zeros(2)}, st_)
    assert st_.t == 2


def test_adam_first_step_magnitude_is_lr():
    p = {"w": np.zeros(3)}
    adam_step(p, {"w": np.array([0.3, -5.0, 1e-2])}, AdamState(lr=0.01))
    np.testing.assert_allclose(p["w"], [-0.01, 0.01, -0.01], rtol=1e-5)


def test_adam_lr_zero_is_identity():
    rng = np.random.default_rng(0)
    w = rng.normal(size=(3, 3))
    p = {"w": w.copy()}
    st_ = AdamState(lr=0.0, weight_decay=0.1)
    for _ in range(3):
        adam_step(p, {"w": rng.normal(size=(3, 3))}, st_)
    np.testing.assert_array_equal(p["w"], w)


def test_adam_weight_decay_is_l2_in_gradient():
    # zero gradient with decay behaves like gradient wd * theta
    a = {"w": np.array([2.0])}
    b = {"w": np.array([2.0])}
    adam_step(a, {"w": np.zeros(1)}, AdamState(lr=0.1, weight_decay=0.5))
    adam_step(b, {"w": np.array([1.0])}, AdamState(lr=0.1))
    np.testing.assert_array_equal(a["w"], b["w"])


def test_adam_shape_mismatch():
    with pytest.raises(ValueError):
        adam_step({"w": np.zeros(2)}, {"w": np.zeros(3)}, AdamState())


def test_finite_diff_quadratic_and_linear():
    theta = {"t": np.array([0.3, -1.2, 2.0])}
    assert finite_diff_check(lambda p: (0.5 * np.sum(p["t"] ** 2), {"t": p["t"].copy()}), theta) < 1e-9
    c = np.array([1.0, -2.0, 0.5])
    assert finite_diff_check(lambda p: (c @ p["t"], {"t": c}), theta) < 1e-9
    np.testing.assert_array_equal(theta["t"], [0.3, -1.2, 2.0])


def test_finite_diff_detects_wrong_gradient():
    theta = {"t": np.array([1.0, 2.0])}
    assert finite_diff_check(lambda p: (np.sum(p["t"] ** 2), {"t": p["t"]}), theta) > 0.1
