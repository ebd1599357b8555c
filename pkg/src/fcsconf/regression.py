"""Ridge and Gaussian-process regression with augmented leave-one-out identities.

For a training set ``Z_1..Z_n`` and a test input ``x_test``, refitting on
``Z_{-i} + {(x_test, y)}`` and predicting at ``X_i`` is an affine function
``a_i + b_i * y`` of the candidate label. :func:`augmented_loo_system`
computes every ``(a_i, b_i)`` with ``n + 1`` fits, so the full conformal set
never needs per-candidate retraining.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import linalg


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class Dataset:
    """``n`` feature rows with their labels."""

    inputs: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        y = np.asarray(self.labels, dtype=float).ravel()
        if X.shape[0] != y.shape[0]:
            raise ValueError(f"{X.shape[0]} inputs but {y.shape[0]} labels")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValueError("inputs and labels must be finite")
        object.__setattr__(self, "inputs", X)
        object.__setattr__(self, "labels", y)

    def __len__(self):
        return self.labels.shape[0]

    @property
    def n_features(self):
        return self.inputs.shape[1]

    def without(self, i):
        keep = np.arange(len(self)) != i
        return Dataset(self.inputs[keep], self.labels[keep])

    def with_point(self, x, y):
        return Dataset(np.vstack([self.inputs, np.asarray(x, dtype=float)[None, :]]),
                       np.append(self.labels, y))


@dataclass(frozen=True)
class RidgeConfig:
    gamma: float = 1.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"ridge gamma must be positive, got {self.gamma!r}")


@dataclass(frozen=True)
class RidgeModel:
    coefficients: np.ndarray

    def predict(self, x):
        return predict(self, x)


def fit_ridge(data: Dataset, config: RidgeConfig) -> RidgeModel:
    """Solve ``(X^T X + gamma I) beta = X^T y`` by Cholesky factorization."""
    X, y = data.inputs, data.labels
    G = X.T @ X
    G[np.diag_indices_from(G)] += config.gamma
    beta = linalg.cho_solve(linalg.cho_factor(G, lower=True), X.T @ y)
    return RidgeModel(beta)


def predict(model: RidgeModel, x) -> float | np.ndarray:
    """Dot product with the coefficients; ``x`` may be one row or a matrix."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != model.coefficients.shape[0]:
        raise ValueError(f"feature dimension {x.shape[-1]} != {model.coefficients.shape[0]}")
    out = x @ model.coefficients
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class AugmentedLooSystem:
    """Affine candidate-label dependence of every augmented LOO prediction.

    Attributes
    ----------
    intercepts, slopes : ndarray, shape (n,)
        ``a_i`` and ``b_i``: the model fit on ``Z_{-i}`` plus ``(x_test, y)``
        predicts ``a_i + b_i * y`` at ``X_i``.
    test_intercept : float
        ``a_{n+1}``, the full-data prediction at ``x_test``.
    param_intercepts, param_slopes : ndarray, shape (n, p)
        ``C_i`` and ``A_{-i;n}``: the refit coefficient vector is
        ``C_i + y * A_{-i;n}``.
    full_coefficients : ndarray, shape (p,)
        Ridge coefficients on all ``n`` training points.
    """

    intercepts: np.ndarray
    slopes: np.ndarray
    test_intercept: float
    param_intercepts: np.ndarray
    param_slopes: np.ndarray
    full_coefficients: np.ndarray

    def loo_predictions(self, y):
        """``(n, len(y))`` array of augmented LOO predictions."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        return self.intercepts[:, None] + self.slopes[:, None] * y[None, :]


def augmented_loo_system(data: Dataset, x_test, config: RidgeConfig) -> AugmentedLooSystem:
    X, Y = data.inputs, data.labels
    n, p = X.shape
    if n < 2:
        raise ValueError("augmented LOO needs at least two training points")
    x_test = np.asarray(x_test, dtype=float).ravel()
    if x_test.shape[0] != p:
        raise ValueError(f"test input has {x_test.shape[0]} features, training has {p}")

    G = X.T @ X
    G[np.diag_indices_from(G)] += config.gamma
    XtY = X.T @ Y
    beta = linalg.cho_solve(linalg.cho_factor(G, lower=True), XtY)
    G_test = G + np.outer(x_test, x_test)

    C = np.empty((n, p))
    A_tail = np.empty((n, p))
    rhs = np.empty((p, 2))
    rhs[:, 1] = x_test
    for i in range(n):
        xi = X[i]
        Gi = G_test - np.outer(xi, xi)
        rhs[:, 0] = XtY - Y[i] * xi
        sol = linalg.cho_solve(linalg.cho_factor(Gi, lower=True), rhs)
        C[i] = sol[:, 0]
        A_tail[i] = sol[:, 1]

    a = np.einsum("ij,ij->i", C, X)
    b = np.einsum("ij,ij->i", A_tail, X)
    return AugmentedLooSystem(a, b, float(beta @ x_test), C, A_tail, beta)


# ---------------------------------------------------------------------------
# Gaussian processes

Kernel = Callable[[np.ndarray, np.ndarray], np.ndarray]


def linear_kernel(U, V):
    return np.atleast_2d(U) @ np.atleast_2d(V).T


def rbf_kernel(lengthscale=1.0, variance=1.0) -> Kernel:
    def k(U, V):
        U, V = np.atleast_2d(U), np.atleast_2d(V)
        d2 = (np.sum(U**2, 1)[:, None] + np.sum(V**2, 1)[None, :] - 2 * U @ V.T)
        return variance * np.exp(-0.5 * np.maximum(d2, 0.0) / lengthscale**2)
    return k


@dataclass(frozen=True)
class GpConfig:
    kernel: Kernel = linear_kernel
    noise_variance: float = 1.0

    def __post_init__(self):
        if self.noise_variance < 0:
            raise ValueError("noise_variance must be nonnegative")


def _gp_factor(K, noise_variance):
    M = K + noise_variance * np.eye(K.shape[0])
    try:
        return linalg.cho_factor(M, lower=True)
    except np.linalg.LinAlgError as exc:
        eig = np.linalg.eigvalsh(M).min()
        raise NotPositiveDefiniteError(
            f"kernel matrix plus noise is not positive definite (min eigenvalue {eig:.3e})"
        ) from exc


def gp_posterior_linear(data: Dataset, x, config: GpConfig, x_test):
    """Posterior at ``x`` after adding ``(x_test, y)`` to ``data``.

    The posterior mean is ``intercept + slope * y`` and the posterior
    variance does not depend on ``y``.

    Returns
    -------
    intercept, slope, variance : float
    """
    x = np.asarray(x, dtype=float).ravel()
    Xa = np.vstack([data.inputs, np.asarray(x_test, dtype=float).ravel()[None, :]])
    factor = _gp_factor(config.kernel(Xa, Xa), config.noise_variance)
    kx = config.kernel(x[None, :], Xa).ravel()
    coef = linalg.cho_solve(factor, kx)
    intercept = float(coef[:-1] @ data.labels)
    slope = float(coef[-1])
    variance = float(config.kernel(x[None, :], x[None, :])[0, 0] - kx @ coef)
    return intercept, slope, max(variance, 0.0)


def gp_augmented_loo_system(data: Dataset, x_test, config: GpConfig):
    """GP analogue of :func:`augmented_loo_system`.

    Returns
    -------
    intercepts, slopes, variances : ndarray, shape (n,)
        Mean ``a_i + b_i * y`` and variance at ``X_i`` of the GP fit on
        ``Z_{-i}`` plus ``(x_test, y)``.
    test_mean, test_variance : float
        Posterior at ``x_test`` given the full training set.
    """
    n = len(data)
    out = np.array([gp_posterior_linear(data.without(i), data.inputs[i], config, x_test)
                    for i in range(n)]).reshape(n, 3)
    X = data.inputs
    factor = _gp_factor(config.kernel(X, X), config.noise_variance)
    xt = np.asarray(x_test, dtype=float).ravel()[None, :]
    kt = config.kernel(xt, X).ravel()
    coef = linalg.cho_solve(factor, kt)
    test_mean = float(coef @ data.labels)
    test_var = max(float(config.kernel(xt, xt)[0, 0] - kt @ coef), 0.0)
    return out[:, 0], out[:, 1], out[:, 2], test_mean, test_var
