"""Full conformal confidence sets under feedback covariate shift.

A score function is called as ``score(x, y, data)`` and returns the
nonconformity of point ``(x, y)`` relative to the multiset ``data``. A
likelihood-ratio function is called as ``lr(x, data)`` and returns
``p_test(x; data) / p_train(x)``, the density ratio of the test-input
distribution induced by ``data``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .design import BoltzmannDesign
from .landscape import MAX_LENGTH, Landscape
from .quantile import column_quantiles, lower_bound_probability
from .regression import Dataset, RidgeConfig, augmented_loo_system, fit_ridge, predict


class DegenerateWeightsError(ValueError):
    """All likelihood ratios are zero, so the weights cannot be normalized."""


@dataclass(frozen=True)
class CandidateGrid:
    """Evenly spaced candidate labels ``lo, lo + step, ...`` up to ``hi``."""

    lo: float
    hi: float
    step: float

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("grid step must be positive")
        if not self.lo < self.hi:
            raise ValueError("grid needs lo < hi")

    @property
    def count(self):
        return int(math.floor((self.hi - self.lo) / self.step + 1e-9)) + 1

    @property
    def values(self):
        return self.lo + self.step * np.arange(self.count)

    @classmethod
    def around(cls, labels, margin=0.25, divisions=100):
        """Grid spanning the label range widened by ``margin`` of the range on
        each side, with step ``range / divisions``."""
        lo, hi = float(np.min(labels)), float(np.max(labels))
        span = hi - lo if hi > lo else 1.0
        return cls(lo - margin * span, hi + margin * span, span / divisions)

    @classmethod
    def parse(cls, text):
        lo, hi, step = (float(t) for t in text.split(":"))
        return cls(lo, hi, step)

    def __str__(self):
        return f"{self.lo!r}:{self.hi!r}:{self.step!r}"


@dataclass(frozen=True)
class GridConfidenceSet:
    grid: CandidateGrid
    included: np.ndarray

    def __post_init__(self):
        inc = np.asarray(self.included, dtype=bool).ravel()
        if inc.shape[0] != self.grid.count:
            raise ValueError("one inclusion flag per grid value required")
        object.__setattr__(self, "included", inc)

    @property
    def values(self):
        return self.grid.values[self.included]

    def __len__(self):
        return int(self.included.sum())

    @property
    def width(self):
        return self.grid.step * len(self)

    def covers(self, y):
        """True when some included value lies within half a grid step of ``y``."""
        vals = self.values
        if vals.size == 0:
            return False
        return bool(np.min(np.abs(vals - y)) <= self.grid.step / 2 * (1 + 1e-9))

    def is_subset(self, other):
        return bool(np.all(~self.included | other.included))

    def __eq__(self, other):
        return (isinstance(other, GridConfidenceSet) and self.grid == other.grid
                and np.array_equal(self.included, other.included))

    __hash__ = None


# ---------------------------------------------------------------------------
# Threshold rules shared by every construction

def normalize_weights(v):
    v = np.asarray(v, dtype=float)
    total = v.sum(axis=0)
    if np.any(~(total > 0)):
        raise DegenerateWeightsError("likelihood ratios sum to zero; test distribution "
                                     "is not absolutely continuous w.r.t. training")
    return v / total


def normalize_log_weights(log_v):
    log_v = np.asarray(log_v, dtype=float)
    log_total = logsumexp(log_v, axis=0)
    if np.any(~np.isfinite(log_total)):
        raise DegenerateWeightsError("likelihood ratios sum to zero or overflow")
    return np.exp(log_v - log_total)


def conformal_flags(scores, weights, alpha):
    """Include column ``j`` when the last score is at most the weighted
    ``1 - alpha`` quantile of that column."""
    q = column_quantiles(scores, weights, 1.0 - alpha)[0]
    return scores[-1] <= q


def randomized_conformal_flags(scores, weights, alpha, rng):
    """Same as :func:`conformal_flags` with an independent randomized quantile
    per column."""
    beta = 1.0 - alpha
    q, lb, qf, lf = column_quantiles(scores, weights, beta)
    p_lb = lower_bound_probability(qf, lf, beta)
    u = np.asarray(rng.random(q.shape[0]))
    threshold = np.where(u < p_lb, lb, q)
    return scores[-1] <= threshold


# ---------------------------------------------------------------------------
# Generic path (one refit per training point and candidate label)

def residual_score(fit=None):
    """``|y - mu_D(x)|`` where ``mu_D`` is fit on ``D`` by ``fit`` (ridge with
    ``gamma = 1`` by default)."""
    if fit is None:
        config = RidgeConfig(1.0)
        fit = lambda data: fit_ridge(data, config)  # noqa: E731

    def score(x, y, data):
        return abs(y - predict(fit(data), x))
    return score


def boltzmann_likelihood_ratio(landscape: Landscape, ridge: RidgeConfig, design: BoltzmannDesign):
    """``v(x; D)`` for the Boltzmann design around a ridge model fit on ``D``,
    with uniform training inputs over the landscape."""
    X_all = landscape.features

    def lr(x, data):
        beta = fit_ridge(data, ridge).coefficients
        logits = design.lam * (X_all @ beta)
        return float(np.exp(design.lam * (np.asarray(x) @ beta) - logsumexp(logits)) * landscape.size)
    return lr


def conformal_scores_and_ratios(train: Dataset, x_test, grid: CandidateGrid, score, lr):
    """Scores and FCS likelihood ratios for every candidate label.

    Returns
    -------
    scores, ratios : ndarray, shape (n + 1, len(grid))
        Row ``i < n`` refers to training point ``i`` compared against
        ``Z_{-i} + {(x_test, y)}``; the last row to the candidate test point.
    """
    n = len(train)
    if n < 1:
        raise ValueError("training data must be nonempty")
    ys = grid.values
    x_test = np.asarray(x_test, dtype=float)
    scores = np.empty((n + 1, ys.shape[0]))
    ratios = np.empty_like(scores)
    ratios[n] = lr(x_test, train)
    loo = [train.without(i) for i in range(n)]
    for j, y in enumerate(ys):
        for i in range(n):
            aug = loo[i].with_point(x_test, y)
            xi, yi = train.inputs[i], train.labels[i]
            scores[i, j] = score(xi, yi, aug)
            ratios[i, j] = lr(xi, aug)
        scores[n, j] = score(x_test, y, train)
    return scores, ratios


def full_conformal_set(train, x_test, grid, alpha, score, lr) -> GridConfidenceSet:
    scores, ratios = conformal_scores_and_ratios(train, x_test, grid, score, lr)
    return GridConfidenceSet(grid, conformal_flags(scores, normalize_weights(ratios), alpha))


def randomized_full_conformal_set(train, x_test, grid, alpha, score, lr, rng) -> GridConfidenceSet:
    scores, ratios = conformal_scores_and_ratios(train, x_test, grid, score, lr)
    flags = randomized_conformal_flags(scores, normalize_weights(ratios), alpha, rng)
    return GridConfidenceSet(grid, flags)


def scs_full_conformal_set(train, x_test, grid, alpha, score, fixed_lr) -> GridConfidenceSet:
    """Weighted full conformal set with weights from one fixed likelihood
    ratio ``fixed_lr(x)``, as prescribed for standard covariate shift."""
    n = len(train)
    ys = grid.values
    x_test = np.asarray(x_test, dtype=float)
    scores = np.empty((n + 1, ys.shape[0]))
    loo = [train.without(i) for i in range(n)]
    for j, y in enumerate(ys):
        for i in range(n):
            scores[i, j] = score(train.inputs[i], train.labels[i], loo[i].with_point(x_test, y))
        scores[n, j] = score(x_test, y, train)
    v = np.array([fixed_lr(x) for x in train.inputs] + [fixed_lr(x_test)])
    weights = np.broadcast_to(normalize_weights(v)[:, None], scores.shape)
    return GridConfidenceSet(grid, conformal_flags(scores, weights, alpha))


# ---------------------------------------------------------------------------
# Efficient ridge path

@dataclass(frozen=True)
class RidgeConformalScores:
    """Scores and weights for all candidate labels from ``n + 1`` ridge fits.

    Attributes
    ----------
    scores : ndarray, shape (n + 1, m)
    log_ratios : ndarray, shape (n + 1, m)
        Log FCS likelihood ratios ``log v(X_i; Z_{-i} + {(x_test, y)})``;
        the last row is ``log v(x_test; Z_{1:n})`` repeated.
    scs_log_ratios : ndarray, shape (n + 1,)
        Log ratios under the single test distribution induced by ``Z_{1:n}``.
    """

    grid: CandidateGrid
    scores: np.ndarray
    log_ratios: np.ndarray
    scs_log_ratios: np.ndarray
    test_prediction: float

    @property
    def weights(self):
        return normalize_log_weights(self.log_ratios)

    @property
    def scs_weights(self):
        return np.broadcast_to(normalize_log_weights(self.scs_log_ratios)[:, None], self.scores.shape)

    def confidence_set(self, alpha):
        return GridConfidenceSet(self.grid, conformal_flags(self.scores, self.weights, alpha))

    def randomized_set(self, alpha, rng):
        return GridConfidenceSet(self.grid,
                                 randomized_conformal_flags(self.scores, self.weights, alpha, rng))

    def scs_set(self, alpha):
        return GridConfidenceSet(self.grid, conformal_flags(self.scores, self.scs_weights, alpha))


def _log_partition(U, V, ys, lam):
    """``log sum_x exp(lam * (U[i, x] + y * V[i, x]))`` for every row and ``y``.

    On evenly spaced ``ys`` the exponentials form a geometric sequence in the
    grid index, so one exp per ``(i, x)`` plus running products suffices.
    """
    n, K = U.shape[0], ys.shape[0]
    out = np.empty((n, K))
    if lam == 0:
        out[:] = np.log(U.shape[1])
        return out
    e0 = lam * (U + ys[0] * V)
    e1 = lam * (U + ys[-1] * V)
    spread = lam * abs(ys[-1] - ys[0]) * np.abs(V).max(initial=0.0)
    even = K < 2 or np.allclose(np.diff(ys), ys[1] - ys[0], rtol=1e-12, atol=0)
    if even and spread < 600.0:
        shift = np.maximum(e0.max(axis=1), e1.max(axis=1))
        term = np.exp(e0 - shift[:, None])
        ratio = np.exp(lam * (ys[1] - ys[0]) * V) if K > 1 else None
        for k in range(K):
            out[:, k] = term.sum(axis=1)
            if k + 1 < K:
                term *= ratio
        return np.log(out) + shift[:, None]
    for i in range(n):
        out[i] = logsumexp(lam * (U[i][None, :] + ys[:, None] * V[i][None, :]), axis=1)
    return out


def ridge_conformal_scores(train: Dataset, x_test, grid: CandidateGrid, ridge: RidgeConfig,
                           design: BoltzmannDesign, landscape: Landscape) -> RidgeConformalScores:
    """Residual scores and Boltzmann-design likelihood ratios via the
    augmented leave-one-out system."""
    if landscape.length > MAX_LENGTH:
        raise NotImplementedError("landscape too large for exact normalization")
    lam = design.lam
    X_all = landscape.features
    log_train_density = -np.log(landscape.size)
    ys = grid.values
    sys_ = augmented_loo_system(train, x_test, ridge)

    preds = sys_.loo_predictions(ys)
    scores = np.empty((len(train) + 1, ys.shape[0]))
    scores[:-1] = np.abs(train.labels[:, None] - preds)
    scores[-1] = np.abs(ys - sys_.test_intercept)

    U = sys_.param_intercepts @ X_all.T
    V = sys_.param_slopes @ X_all.T
    log_ratios = np.empty_like(scores)
    log_ratios[:-1] = lam * preds - _log_partition(U, V, ys, lam) - log_train_density
    full_logits = lam * (X_all @ sys_.full_coefficients)
    log_z_full = logsumexp(full_logits)
    log_ratios[-1] = lam * sys_.test_intercept - log_z_full - log_train_density

    full_preds = np.append(train.inputs @ sys_.full_coefficients, sys_.test_intercept)
    scs = lam * full_preds - log_z_full - log_train_density
    return RidgeConformalScores(grid, scores, log_ratios, scs, sys_.test_intercept)


def full_conformal_set_ridge(train, x_test, grid, alpha, ridge, design, landscape) -> GridConfidenceSet:
    return ridge_conformal_scores(train, x_test, grid, ridge, design, landscape).confidence_set(alpha)
