import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fcsconf.regression import (
    Dataset,
    GpConfig,
    NotPositiveDefiniteError,
    RidgeConfig,
    RidgeModel,
    augmented_loo_system,
    fit_ridge,
    gp_augmented_loo_system,
    gp_posterior_linear,
    linear_kernel,
    predict,
    rbf_kernel,
)

import oracles


def _data(rng, n, p):
    return Dataset(rng.standard_normal((n, p)), rng.standard_normal(n))


def test_huge_gamma_shrinks_to_zero():
    m = fit_ridge(Dataset([[1.0], [-1.0]], [1.0, -1.0]), RidgeConfig(1e12))
    assert abs(m.coefficients[0]) < 1e-11


def test_small_gamma_closed_form():
    gamma = 1e-4
    m = fit_ridge(Dataset([[1.0], [-1.0]], [1.0, -1.0]), RidgeConfig(gamma))
    assert m.coefficients[0] == pytest.approx(2 / (2 + gamma), abs=1e-12)
    assert abs(m.coefficients[0] - 1) < 1e-3
    assert predict(m, [1.0]) == pytest.approx(2 / (2 + gamma))


def test_predict_examples():
    assert predict(RidgeModel(np.zeros(3)), [1.0, 2.0, 3.0]) == 0.0
    assert predict(RidgeModel(np.array([2.0, -1.0])), [1.0, 1.0]) == 1.0
    with pytest.raises(ValueError):
        predict(RidgeModel(np.array([2.0, -1.0])), [1.0])


def test_dataset_validation():
    with pytest.raises(ValueError):
        Dataset(np.zeros((3, 2)), np.zeros(2))
    with pytest.raises(ValueError):
        RidgeConfig(0.0)


@pytest.mark.parametrize("seed", range(10))
def test_fit_matches_normal_equations(seed):
    rng = np.random.default_rng(seed)
    n, p = rng.integers(2, 25), rng.integers(1, 15)
    data = _data(rng, n, p)
    gamma = 10 ** rng.uniform(-3, 2)
    beta = fit_ridge(data, RidgeConfig(gamma)).coefficients
    expected = oracles.ridge_coef(data.inputs, data.labels, gamma)
    X = rng.standard_normal((5, p))
    np.testing.assert_allclose(X @ beta, X @ expected, rtol=1e-8, atol=1e-12)


def test_fit_invariant_to_row_order():
    rng = np.random.default_rng(7)
    data = _data(rng, 15, 6)
    perm = rng.permutation(15)
    a = fit_ridge(data, RidgeConfig(0.5)).coefficients
    b = fit_ridge(Dataset(data.inputs[perm], data.labels[perm]), RidgeConfig(0.5)).coefficients
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 20), st.integers(1, 10), st.integers(0, 2**31), st.floats(1e-2, 10.0))
def test_augmented_loo_matches_naive_refit(n, p, seed, gamma):
    rng = np.random.default_rng(seed)
    data = _data(rng, n, p)
    x_test = rng.standard_normal(p)
    sys_ = augmented_loo_system(data, x_test, RidgeConfig(gamma))
    ys = rng.uniform(-5, 5, size=5)
    got = sys_.loo_predictions(ys)
    for i in range(n):
        for j, y in enumerate(ys):
            want = oracles.refit_prediction(data.inputs, data.labels, i, x_test, y, gamma)
            assert abs(got[i, j] - want) <= 1e-8 * max(1.0, abs(want))
    full = oracles.ridge_coef(data.inputs, data.labels, gamma)
    assert sys_.test_intercept == pytest.approx(float(full @ x_test), rel=1e-8, abs=1e-12)
    # refit coefficient vectors are C_i + y A_i
    i = int(rng.integers(n))
    b = oracles.ridge_coef(np.vstack([np.delete(data.inputs, i, 0), x_test]),
                           np.append(np.delete(data.labels, i), ys[0]), gamma)
    np.testing.assert_allclose(sys_.param_intercepts[i] + ys[0] * sys_.param_slopes[i], b,
                               rtol=1e-8, atol=1e-10)


def test_duplicate_test_point_reproduces_full_fit():
    rng = np.random.default_rng(11)
    data = _data(rng, 8, 4)
    i = 3
    sys_ = augmented_loo_system(data, data.inputs[i], RidgeConfig(1.0))
    pred = sys_.intercepts[i] + sys_.slopes[i] * data.labels[i]
    full = oracles.ridge_coef(data.inputs, data.labels, 1.0)
    assert pred == pytest.approx(float(full @ data.inputs[i]), rel=1e-10)


def test_shrinkage_limit_of_loo_system():
    rng = np.random.default_rng(2)
    sys_ = augmented_loo_system(_data(rng, 6, 3), rng.standard_normal(3), RidgeConfig(1e12))
    assert np.all(np.abs(sys_.intercepts) < 1e-10)
    assert np.all(np.abs(sys_.slopes) < 1e-10)


def test_loo_system_needs_two_points():
    with pytest.raises(ValueError):
        augmented_loo_system(Dataset([[1.0]], [1.0]), [1.0], RidgeConfig(1.0))


# ---------------------------------------------------------------------------
# Gaussian processes

def _gp_direct(X, Y, x, kernel, s2):
    """Posterior mean and variance by an explicit inverse."""
    K = kernel(X, X) + s2 * np.eye(len(Y))
    kx = kernel(x[None, :], X).ravel()
    Kinv = np.linalg.inv(K)
    return kx @ Kinv @ Y, kernel(x[None, :], x[None, :])[0, 0] - kx @ Kinv @ kx


def test_linear_kernel_gp_equals_ridge_loo():
    rng = np.random.default_rng(5)
    data = _data(rng, 9, 4)
    x_test = rng.standard_normal(4)
    s2 = 0.7
    sys_ = augmented_loo_system(data, x_test, RidgeConfig(s2))
    a, b, var, mean_t, _ = gp_augmented_loo_system(data, x_test, GpConfig(linear_kernel, s2))
    np.testing.assert_allclose(a, sys_.intercepts, rtol=1e-9, atol=1e-12)
    np.testing.assert_allclose(b, sys_.slopes, rtol=1e-9, atol=1e-12)
    assert mean_t == pytest.approx(sys_.test_intercept, rel=1e-9)
    assert np.all(var >= 0)


def test_gp_infinite_noise_limit():
    rng = np.random.default_rng(6)
    data = _data(rng, 5, 2)
    icpt, slope, var = gp_posterior_linear(data, rng.standard_normal(2),
                                           GpConfig(rbf_kernel(), 1e12), rng.standard_normal(2))
    assert abs(slope) < 1e-11 and abs(icpt) < 1e-10
    assert var == pytest.approx(1.0, abs=1e-9)


def test_rbf_gp_matches_direct_solve():
    rng = np.random.default_rng(8)
    data = _data(rng, 3, 2)
    x, x_test = rng.standard_normal(2), rng.standard_normal(2)
    kern = rbf_kernel(lengthscale=0.8, variance=1.5)
    icpt, slope, var = gp_posterior_linear(data, x, GpConfig(kern, 0.1), x_test)
    Xa = np.vstack([data.inputs, x_test])
    for y in (-2.0, 0.3, 4.0):
        m, v = _gp_direct(Xa, np.append(data.labels, y), x, kern, 0.1)
        assert icpt + slope * y == pytest.approx(m, abs=1e-8)
        assert var == pytest.approx(v, abs=1e-8)


def test_gp_variance_independent_of_label():
    rng = np.random.default_rng(9)
    data = _data(rng, 6, 3)
    x, x_test = rng.standard_normal(3), rng.standard_normal(3)
    kern = rbf_kernel()
    _, _, var = gp_posterior_linear(data, x, GpConfig(kern, 0.2), x_test)
    Xa = np.vstack([data.inputs, x_test])
    for y in rng.uniform(-10, 10, size=5):
        _, v = _gp_direct(Xa, np.append(data.labels, y), x, kern, 0.2)
        assert v == pytest.approx(var, abs=1e-10)
        assert v >= -1e-12


def test_gp_not_positive_definite_reports_eigenvalue():
    X = np.array([[1.0, 0.0], [1.0, 0.0]])
    with pytest.raises(NotPositiveDefiniteError, match="eigenvalue"):
        gp_posterior_linear(Dataset(X, [1.0, 2.0]), X[0], GpConfig(linear_kernel, 0.0), X[0])
