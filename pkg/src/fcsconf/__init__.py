"""Conformal confidence sets under feedback covariate shift.

Confidence sets for inputs chosen by a model trained on the very data used
for calibration, plus a simulator of single-shot design on enumerable
landscapes.
"""

from .conformal import (
    CandidateGrid,
    DegenerateWeightsError,
    GridConfidenceSet,
    boltzmann_likelihood_ratio,
    full_conformal_set,
    full_conformal_set_ridge,
    randomized_full_conformal_set,
    residual_score,
    ridge_conformal_scores,
    scs_full_conformal_set,
)
from .design import BoltzmannDesign, boltzmann_distribution, rejection_sample, sample_training
from .landscape import Landscape, estimate_noise_sd, generate_synthetic_landscape, load_landscape, save_landscape
from .metrics import empirical_coverage, exceed_reference_frequency, jaccard_distance, summarize, tradeoff_curve
from .quantile import (
    NEG_INFINITY,
    WeightedDiscreteDist,
    cdf_at,
    quantile,
    quantile_lower_bound,
    randomized_quantile,
)
from .regression import (
    Dataset,
    GpConfig,
    RidgeConfig,
    augmented_loo_system,
    fit_ridge,
    gp_posterior_linear,
    predict,
)
from .simulate import TrialConfig, TrialRecord, run_trials
from .split import CalibrationSet, StaircaseSet, randomized_staircase_set, set_size, split_conformal_interval

__version__ = "0.1.0"
