"""Weighted discrete distributions and their (randomized) quantiles.

All quantile machinery in the package goes through :func:`column_quantiles`,
which works on a batch of distributions at once (one per column). The
:class:`WeightedDiscreteDist` wrapper exposes the scalar operations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NEG_INFINITY = -np.inf

# Cumulative masses are compared against beta with this slack so that, e.g.,
# nine masses of 1/10 reach 0.9 despite rounding.
CUM_TOL = 1e-12
MASS_SUM_TOL = 1e-9


def _check_beta(beta):
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0, 1), got {beta!r}")


@dataclass(frozen=True)
class WeightedDiscreteDist:
    """Point masses ``masses`` located at ``support``.

    Masses are renormalized on construction; their sum must already be within
    ``1e-9`` of one. Repeated support values are allowed and their masses add.
    """

    support: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        s = np.array(self.support, dtype=float).ravel()
        w = np.array(self.masses, dtype=float).ravel()
        if s.size == 0 or s.size != w.size:
            raise ValueError("support and masses must have equal nonzero length")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("masses must be finite and nonnegative")
        total = w.sum()
        if abs(total - 1.0) > MASS_SUM_TOL:
            raise ValueError(f"masses sum to {total!r}, not 1")
        s.flags.writeable = False
        w = w / total
        w.flags.writeable = False
        object.__setattr__(self, "support", s)
        object.__setattr__(self, "masses", w)

    @classmethod
    def from_weights(cls, support, weights):
        """Build from unnormalized nonnegative weights."""
        w = np.asarray(weights, dtype=float)
        total = w.sum()
        if not total > 0:
            raise ValueError("weights sum to zero")
        return cls(support, w / total)

    def cdf(self, s):
        return cdf_at(self, s)

    def quantile(self, beta):
        return quantile(self, beta)

    def quantile_lower_bound(self, beta):
        return quantile_lower_bound(self, beta)

    def randomized_quantile(self, beta, rng):
        return randomized_quantile(self, beta, rng)


def cdf_at(dist: WeightedDiscreteDist, s: float) -> float:
    """Total mass at support points ``<= s``."""
    return float(dist.masses[dist.support <= s].sum())


def column_quantiles(scores, weights, beta):
    """Quantile, lower bound and the CDF at each, per column.

    Parameters
    ----------
    scores, weights : ndarray, shape (k, m)
        Column ``j`` holds one discrete distribution. Weights in a column must
        sum to one. Scores may be ``+inf``.
    beta : float
        Quantile level in (0, 1).

    Returns
    -------
    q, lb, qf, lf : ndarray, shape (m,)
        ``q`` is the beta-quantile, ``lb`` the beta-quantile lower bound
        (``-inf`` when it does not exist), ``qf``/``lf`` the CDF evaluated at
        ``q`` and ``lb`` (``lf = 0`` when ``lb = -inf``).
    """
    _check_beta(beta)
    scores = np.asarray(scores, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if scores.ndim == 1:
        scores = scores[:, None]
        weights = weights[:, None]
    k, m = scores.shape
    cols = np.arange(m)

    order = np.argsort(scores, axis=0, kind="stable")
    s = np.take_along_axis(scores, order, axis=0)
    w = np.take_along_axis(weights, order, axis=0)
    cum = np.cumsum(w, axis=0)
    # CDF at each sorted point must include every tied point after it.
    last_of_run = np.ones((k, m), dtype=bool)
    last_of_run[:-1] = s[1:] != s[:-1]
    idx = np.where(last_of_run, np.arange(k)[:, None], k)
    idx = np.minimum.accumulate(idx[::-1], axis=0)[::-1]
    F = np.take_along_axis(cum, idx, axis=0)

    reach = F >= beta - CUM_TOL
    reach[-1] = True
    qi = np.argmax(reach, axis=0)
    q = s[qi, cols]
    qf = F[qi, cols]
    # qi starts its tie run, so everything before it is strictly smaller.
    below_q = np.where(qi > 0, cum[np.maximum(qi - 1, 0), cols], 0.0)
    mass_q = qf - below_q

    # Smallest support point whose CDF already lies in [beta - mass_q, beta).
    need = beta - mass_q
    ok = (F >= need[None, :] - CUM_TOL) & (F < beta - CUM_TOL)
    has = np.any(ok, axis=0) & (need > CUM_TOL)
    li = np.argmax(ok, axis=0)
    lb = np.where(has, s[li, cols], NEG_INFINITY)
    lf = np.where(has, F[li, cols], 0.0)
    return q, lb, qf, lf


def lower_bound_probability(qf, lf, beta):
    """Probability that the randomized quantile takes the lower-bound value."""
    qf = np.asarray(qf, dtype=float)
    lf = np.asarray(lf, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        p = (qf - beta) / (qf - lf)
    return np.clip(np.where(qf - beta <= CUM_TOL, 0.0, p), 0.0, 1.0)


def _single(dist, beta):
    return column_quantiles(dist.support, dist.masses, beta)


def quantile(dist: WeightedDiscreteDist, beta: float) -> float:
    """Smallest support value whose CDF reaches ``beta``."""
    return float(_single(dist, beta)[0][0])


def quantile_lower_bound(dist: WeightedDiscreteDist, beta: float) -> float:
    """The beta-quantile lower bound, or ``NEG_INFINITY`` if none exists."""
    return float(_single(dist, beta)[1][0])


def randomized_quantile(dist: WeightedDiscreteDist, beta: float, rng) -> float:
    """Draw the randomized beta-quantile.

    Returns the lower bound with probability ``(QF - beta) / (QF - LF)`` and
    the quantile otherwise.
    """
    q, lb, qf, lf = _single(dist, beta)
    p = lower_bound_probability(qf, lf, beta)[0]
    return float(lb[0]) if rng.random() < p else float(q[0])
