"""Split conformal sets under standard covariate shift.

Scores have the form ``|y - mu(x)| / u(x)`` for a fixed model ``mu`` and a
positive uncertainty heuristic ``u``; calibration points are weighted by a
fixed likelihood ratio ``v(x)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .conformal import normalize_weights
from .quantile import CUM_TOL, _check_beta, column_quantiles


def _ones(X):
    return np.ones(np.atleast_2d(X).shape[0])


@dataclass(frozen=True)
class CalibrationSet:
    """Held-out points with a fitted model and uncertainty heuristic.

    ``model`` and ``uncertainty`` map an ``(k, p)`` input array to ``k``
    values.
    """

    inputs: np.ndarray
    labels: np.ndarray
    model: Callable[[np.ndarray], np.ndarray]
    uncertainty: Callable[[np.ndarray], np.ndarray] = _ones

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        y = np.asarray(self.labels, dtype=float).ravel()
        if X.shape[0] < 1 or X.shape[0] != y.shape[0]:
            raise ValueError("need at least one calibration point and one label per input")
        object.__setattr__(self, "inputs", X)
        object.__setattr__(self, "labels", y)

    def __len__(self):
        return self.labels.shape[0]

    def scores(self):
        u = _positive(self.uncertainty(self.inputs))
        return np.abs(self.labels - np.asarray(self.model(self.inputs), dtype=float)) / u


def _positive(u):
    u = np.asarray(u, dtype=float)
    if np.any(~(u > 0)):
        raise ValueError("uncertainty heuristic must be strictly positive")
    return u


@dataclass(frozen=True)
class StaircaseSet:
    """Sorted disjoint closed intervals; endpoints may be infinite."""

    intervals: tuple = ()

    def __contains__(self, y):
        return any(lo <= y <= hi for lo, hi in self.intervals)

    @property
    def size(self):
        return set_size(self)

    @property
    def is_empty(self):
        return not self.intervals

    def lower(self):
        return self.intervals[0][0] if self.intervals else np.nan


def set_size(s: StaircaseSet) -> float:
    """Total length of the intervals; ``inf`` if any is unbounded."""
    return float(sum(hi - lo for lo, hi in s.intervals))


def _test_point(calib, x_test, lr):
    x = np.atleast_2d(np.asarray(x_test, dtype=float))
    mu = float(np.asarray(calib.model(x), dtype=float).ravel()[0])
    u = float(_positive(calib.uncertainty(x)).ravel()[0])
    v = np.append(np.asarray(lr(calib.inputs), dtype=float).ravel(),
                  float(np.asarray(lr(x), dtype=float).ravel()[0]))
    return mu, u, normalize_weights(v)


def split_conformal_interval(calib: CalibrationSet, x_test, alpha, lr) -> StaircaseSet:
    """``mu(x) +/- q u(x)`` with ``q`` the weighted ``1 - alpha`` quantile of
    the calibration scores plus a point mass at infinity for the test point."""
    mu, u, w = _test_point(calib, x_test, lr)
    scores = np.append(calib.scores(), np.inf)
    q = float(column_quantiles(scores, w, 1.0 - alpha)[0][0])
    if np.isinf(q):
        return StaircaseSet(((-np.inf, np.inf),))
    return StaircaseSet(((mu - q * u, mu + q * u),))


@dataclass(frozen=True)
class Staircase:
    """Score bands and the probability that labels in each band are included.

    Band ``i`` covers scores ``[edges[i], edges[i + 1]]``; the last edge is
    ``inf``.
    """

    edges: np.ndarray
    probabilities: np.ndarray
    center: float
    scale: float

    def realize(self, draws):
        """Build the set from one uniform draw per band."""
        keep = np.asarray(draws) < self.probabilities
        return _band_union(self.edges, keep, self.center, self.scale)

    def inclusion_probability(self, y):
        s = abs(y - self.center) / self.scale
        i = np.searchsorted(self.edges, s, side="right") - 1
        return float(self.probabilities[min(max(i, 0), len(self.probabilities) - 1)])


def staircase(calib: CalibrationSet, x_test, alpha, lr) -> Staircase:
    """Per-band inclusion probabilities of the randomized split set.

    For a candidate score inside band ``i`` the weighted distribution is the
    calibration masses plus the test mass at that score; the band's
    probability is the chance that the randomized ``1 - alpha`` quantile of
    that distribution is at least the score. Runs in ``O(m log m)``.
    """
    beta = 1.0 - alpha
    _check_beta(beta)
    mu, u, w = _test_point(calib, x_test, lr)
    w_test = w[-1]
    vals, inv = np.unique(calib.scores(), return_inverse=True)
    mass = np.bincount(inv, weights=w[:-1], minlength=vals.shape[0])
    r = vals.shape[0]
    cw = np.concatenate([[0.0], np.cumsum(mass)])  # cw[j]: calibration mass of the j smallest values
    edges = np.concatenate([[0.0], vals, [np.inf]])
    reaches = lambda f: f >= beta - CUM_TOL  # noqa: E731

    def first_reaching(level):
        # smallest j >= 1 with cw[j] >= level, as in the quantile lower bound
        return int(np.searchsorted(cw[1:], level - CUM_TOL, side="left")) + 1

    probs = np.zeros(r + 1)
    for i in range(r + 1):
        cum = cw[i]
        if reaches(cum):
            break
        if reaches(cum + w_test):
            # The candidate score is itself the quantile.
            qf, need = cum + w_test, beta - w_test
            lf = cw[first_reaching(need)] if need > CUM_TOL else 0.0
            probs[i] = 1.0 - _lb_prob(qf, lf, beta)
            continue
        # Quantile is the first calibration value past the band.
        k = int(np.searchsorted(cw, beta - w_test - CUM_TOL, side="left"))
        qf, need = cw[k] + w_test, beta - mass[k - 1]
        if need <= CUM_TOL:
            probs[i] = 1.0 - _lb_prob(qf, 0.0, beta)
        elif cum >= need - CUM_TOL:
            probs[i] = 1.0 - _lb_prob(qf, cw[first_reaching(need)], beta)
        else:
            probs[i] = 1.0
    if edges[1] == 0.0:
        # zero calibration score: band [0, 0] carries no labels of its own
        probs[0] = probs[1] if r > 0 else probs[0]
    return Staircase(edges, probs, mu, u)


def _lb_prob(qf, lf, beta):
    if qf - beta <= CUM_TOL:
        return 0.0
    return min(max((qf - beta) / (qf - lf), 0.0), 1.0)


def _band_union(edges, keep, mu, u):
    lo_scores, hi_scores = [], []
    i, B = 0, len(keep)
    while i < B:
        if not keep[i]:
            i += 1
            continue
        j = i
        while j + 1 < B and keep[j + 1]:
            j += 1
        lo_scores.append(edges[i])
        hi_scores.append(edges[j + 1])
        i = j + 1
    right = [(mu + a * u, mu + b * u) for a, b in zip(lo_scores, hi_scores)]
    left = [(mu - b * u, mu - a * u) for a, b in zip(lo_scores, hi_scores)]
    intervals = sorted(left + right)
    merged = []
    for lo, hi in intervals:
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return StaircaseSet(tuple((float(a), float(b)) for a, b in merged))


def randomized_staircase_set(calib: CalibrationSet, x_test, alpha, lr, rng) -> StaircaseSet:
    """Randomized split set with exact coverage; one Bernoulli draw per band."""
    st = staircase(calib, x_test, alpha, lr)
    return st.realize(rng.random(st.probabilities.shape[0]))
