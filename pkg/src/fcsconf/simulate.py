"""Repeated single-shot design trials on an enumerable landscape.

Each trial samples a training set, fits ridge regression, designs one input
from the Boltzmann distribution of the fitted model, labels it with fresh
measurement noise, and builds a confidence set for it.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import logsumexp

from .conformal import CandidateGrid, GridConfidenceSet, ridge_conformal_scores
from .design import BoltzmannDesign, boltzmann_distribution, noisy_labels, sample_training
from .landscape import Landscape
from .regression import RidgeConfig, fit_ridge
from .split import CalibrationSet, StaircaseSet, randomized_staircase_set, split_conformal_interval

METHODS = ("fcs_full", "fcs_randomized", "scs_full", "split", "staircase")
GRID_METHODS = ("fcs_full", "fcs_randomized", "scs_full")
_FULL_METHODS = set(GRID_METHODS)


class TrialError(RuntimeError):
    def __init__(self, trial, cause):
        super().__init__(f"trial {trial}: {type(cause).__name__}: {cause}")
        self.trial = trial


@dataclass(frozen=True)
class TrialConfig:
    n: int = 32
    lam: float = 0.0
    gamma: float = 1.0
    alpha: float = 0.1
    grid: CandidateGrid | None = None
    trials: int = 100
    method: str = "fcs_full"
    seed: int = 0
    noise_scale: float = 1.0
    n_calib: int | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {', '.join(METHODS)}")
        if self.n_calib is not None and self.n_calib < 1:
            raise ValueError("n_calib must be at least 1")

    def grid_for(self, landscape: Landscape) -> CandidateGrid:
        return self.grid if self.grid is not None else CandidateGrid.around(landscape.fitness)


@dataclass
class TrialRecord:
    trial: int
    method: str
    n: int
    lam: float
    test_id: int
    label: float
    fitness: float
    predicted: float
    conf_set: GridConfidenceSet | StaircaseSet = field(repr=False)
    covered: bool = False
    size: float = 0.0

    @property
    def is_grid(self):
        return isinstance(self.conf_set, GridConfidenceSet)

    @property
    def set_min(self):
        """Smallest label in the set; NaN for an empty set."""
        if self.is_grid:
            vals = self.conf_set.values
            return float(vals[0]) if vals.size else np.nan
        return self.conf_set.lower()


def trial_rng(seed, trial, stream=0):
    """Generator for ``(seed, trial, stream)``; independent of the trial count."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(trial, stream)))


def _record(k, method, config, test_id, label, fitness, predicted, cs):
    if isinstance(cs, GridConfidenceSet):
        covered, size = cs.covers(label), cs.width
    else:
        covered, size = label in cs, cs.size
    return TrialRecord(k, method, config.n, config.lam, int(test_id), float(label), float(fitness),
                       float(predicted), cs, bool(covered), float(size))


def simulate_trial(k, config: TrialConfig, landscape: Landscape, methods):
    rng = trial_rng(config.seed, k)
    ridge = RidgeConfig(config.gamma)
    train, _ = sample_training(landscape, config.n, rng, config.noise_scale)
    model = fit_ridge(train, ridge)
    design = boltzmann_distribution(model, landscape, config.lam)
    test_id = int(design.sample(rng))
    label = float(noisy_labels(landscape, test_id, rng, config.noise_scale)[0])
    x_test = landscape.features[test_id]
    predicted = float(x_test @ model.coefficients)
    fitness = landscape.fitness[test_id]

    out = []
    full = None
    if _FULL_METHODS.intersection(methods):
        full = ridge_conformal_scores(train, x_test, config.grid_for(landscape), ridge,
                                      BoltzmannDesign(config.lam), landscape)
    calib = lr = None
    if {"split", "staircase"}.intersection(methods):
        cal_data, _ = sample_training(landscape, config.n_calib or config.n, rng, config.noise_scale)
        beta = model.coefficients
        calib = CalibrationSet(cal_data.inputs, cal_data.labels, lambda X: X @ beta)
        log_z = logsumexp(config.lam * (landscape.features @ beta))
        lr = lambda X: np.exp(config.lam * (np.atleast_2d(X) @ beta) - log_z) * landscape.size  # noqa: E731

    for method in methods:
        stream = 1 + METHODS.index(method)
        if method == "fcs_full":
            cs = full.confidence_set(config.alpha)
        elif method == "fcs_randomized":
            cs = full.randomized_set(config.alpha, trial_rng(config.seed, k, stream))
        elif method == "scs_full":
            cs = full.scs_set(config.alpha)
        elif method == "split":
            cs = split_conformal_interval(calib, x_test, config.alpha, lr)
        else:
            cs = randomized_staircase_set(calib, x_test, config.alpha, lr,
                                          trial_rng(config.seed, k, stream))
        out.append(_record(k, method, config, test_id, label, fitness, predicted, cs))
    return out


def _run_chunk(args):
    ks, config, landscape, methods = args
    out = []
    for k in ks:
        try:
            out.append(simulate_trial(k, config, landscape, methods))
        except Exception as exc:  # annotate with the trial index
            raise TrialError(k, exc) from exc
    return out


def default_workers():
    try:
        return max(1, int(os.environ.get("FCS_THREADS", "1")))
    except ValueError:
        return 1


def run_trials(config: TrialConfig, landscape: Landscape, methods=None, workers=None):
    """Run ``config.trials`` independent trials.

    Parameters
    ----------
    methods : sequence of str, optional
        Build several confidence sets per trial from the same training data
        and designed input. Defaults to ``[config.method]``.
    workers : int, optional
        Worker processes; defaults to ``$FCS_THREADS`` or 1. Records are
        returned in trial order regardless.

    Returns
    -------
    list of TrialRecord
        Ordered by trial index, then by position in ``methods``.
    """
    methods = list(methods) if methods is not None else [config.method]
    for m in methods:
        replace(config, method=m)  # validates the name
    workers = workers or default_workers()
    ks = list(range(config.trials))
    if workers <= 1 or config.trials < 2 * workers:
        chunks = _run_chunk((ks, config, landscape, methods))
    else:
        parts = [ks[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(workers) as ex:
            results = list(ex.map(_run_chunk, [(p, config, landscape, methods) for p in parts]))
        by_trial = {}
        for part, res in zip(parts, results):
            by_trial.update(zip(part, res))
        chunks = [by_trial[k] for k in ks]
    return [rec for trial in chunks for rec in trial]
