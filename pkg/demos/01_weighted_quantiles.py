"""Weighted quantiles and their randomized variant.

Run: python3 demos/01_weighted_quantiles.py
"""
import numpy as np

from fcsconf import WeightedDiscreteDist, cdf_at, quantile, quantile_lower_bound, randomized_quantile

# A distribution over four scores. The 0.4-quantile is the first support point
# whose cumulative mass reaches 0.4.
d = WeightedDiscreteDist([1, 2, 3, 4], [0.2, 0.2, 0.3, 0.3])
print("F(2) =", cdf_at(d, 2))
print("0.4-quantile:", quantile(d, 0.4))
print("lower bound: ", quantile_lower_bound(d, 0.4))

# When the cumulative mass overshoots beta, the randomized quantile sometimes
# drops to the lower bound. Averaged over draws this makes coverage exact.
d = WeightedDiscreteDist([1, 2], [0.5, 0.5])
rng = np.random.default_rng(0)
draws = np.array([randomized_quantile(d, 0.25, rng) for _ in range(20_000)])
print("0.25-quantile:", quantile(d, 0.25), " lower bound:", quantile_lower_bound(d, 0.25))
print("fraction of draws at the lower bound: %.3f (analytic 0.5)" % np.mean(np.isneginf(draws)))
