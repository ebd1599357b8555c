"""Model-guided design distributions and sampling from landscapes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .landscape import Landscape
from .regression import Dataset, RidgeModel


@dataclass(frozen=True)
class BoltzmannDesign:
    """Design by sampling ``x`` with probability proportional to
    ``exp(lam * mu(x))`` for a trained regression model ``mu``."""

    lam: float = 0.0

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("inverse temperature must be nonnegative")


@dataclass(frozen=True)
class DesignDistribution:
    """Categorical test-input distribution over a landscape's sequences.

    ``log_mass`` holds log probabilities; ``train_mass`` is the uniform
    training density ``1 / 2**L``.
    """

    log_mass: np.ndarray
    train_mass: float

    @property
    def mass(self):
        return np.exp(self.log_mass)

    def likelihood_ratio(self, ids):
        return np.exp(self.log_mass[ids]) / self.train_mass

    def sample(self, rng, size=None):
        return rng.choice(self.log_mass.shape[0], size=size, p=self.mass)


def boltzmann_distribution(model: RidgeModel, landscape: Landscape, lam) -> DesignDistribution:
    logits = lam * (landscape.features @ model.coefficients)
    return DesignDistribution(logits - logsumexp(logits), 1.0 / landscape.size)


def sample_training(landscape: Landscape, n, rng, noise_scale=1.0):
    """Draw ``n`` sequences uniformly with replacement and label them with
    fresh Gaussian measurement noise.

    Returns
    -------
    data : Dataset
    ids : ndarray of int
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    ids = rng.integers(0, landscape.size, size=n)
    return Dataset(landscape.features[ids], noisy_labels(landscape, ids, rng, noise_scale)), ids


def noisy_labels(landscape: Landscape, ids, rng, noise_scale=1.0):
    ids = np.atleast_1d(ids)
    return landscape.fitness[ids] + noise_scale * landscape.noise_sd[ids] * rng.standard_normal(ids.shape)


def rejection_sample(target_mass, proposal_ids, proposal_mass, rng, bound=None):
    """Rejection sampling from a categorical target using proposal draws.

    Parameters
    ----------
    target_mass, proposal_mass : ndarray, shape (k,)
        Probabilities over ids ``0..k-1``.
    proposal_ids : array of int
        Draws from the proposal distribution.
    bound : float, optional
        ``M >= max target/proposal`` over the proposal's support. Computed by
        enumeration when omitted.

    Returns
    -------
    ndarray of int
        The accepted ids, in proposal order. Their number is random.
    """
    target_mass = np.asarray(target_mass, dtype=float)
    proposal_mass = np.asarray(proposal_mass, dtype=float)
    proposal_ids = np.asarray(proposal_ids, dtype=int)
    support = proposal_mass > 0
    ratio = np.zeros_like(target_mass)
    ratio[support] = target_mass[support] / proposal_mass[support]
    max_ratio = ratio.max()
    if bound is None:
        bound = max_ratio
    elif max_ratio > bound * (1 + 1e-12):
        raise ValueError(f"bound M={bound} underestimates max target/proposal ratio {max_ratio}")
    accept = rng.random(proposal_ids.shape[0]) < ratio[proposal_ids] / bound
    return proposal_ids[accept]
