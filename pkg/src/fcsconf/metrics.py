"""Aggregate trial records into coverage, width and trade-off statistics."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .conformal import GridConfidenceSet


def empirical_coverage(records) -> float:
    """Fraction of records whose confidence set covers the test label."""
    records = list(records)
    if not records:
        raise ValueError("no records")
    kinds = {r.is_grid for r in records}
    if len(kinds) > 1:
        raise ValueError("records mix grid and interval confidence sets")
    return float(np.mean([r.covered for r in records]))


def jaccard_distance(a: GridConfidenceSet, b: GridConfidenceSet) -> float:
    """``1 - |a & b| / |a | b|`` over included grid values; 0 if both are empty."""
    if a.grid != b.grid:
        raise ValueError("confidence sets are defined on different grids")
    union = np.count_nonzero(a.included | b.included)
    if union == 0:
        return 0.0
    return 1.0 - np.count_nonzero(a.included & b.included) / union


def exceed_reference_frequency(records, reference_fitness) -> float:
    """Fraction of sets whose smallest member exceeds ``reference_fitness``.

    Empty sets never exceed.
    """
    records = list(records)
    if not records:
        raise ValueError("no records")
    mins = np.array([r.set_min for r in records], dtype=float)
    return float(np.mean(np.nan_to_num(mins, nan=-np.inf) > reference_fitness))


@dataclass(frozen=True)
class SweepSummary:
    n: int
    lam: float
    method: str
    trials: int
    coverage: float
    mean_width: float
    median_width: float
    min_width: float
    max_width: float
    frac_infinite: float
    mean_finite_size: float
    mean_width_frac: float
    mean_predicted: float
    exceed_reference: float

    def as_row(self):
        return asdict(self)


def summarize(records, fitness_range=None, reference_fitness=None) -> SweepSummary:
    """Summary for records sharing ``(n, lam, method)``.

    Infinite sizes are left out of the width statistics and reported through
    ``frac_infinite`` instead. ``mean_width_frac`` divides the mean finite
    width by the landscape's fitness range when given.
    """
    records = list(records)
    if not records:
        raise ValueError("no records")
    keys = {(r.n, r.lam, r.method) for r in records}
    if len(keys) != 1:
        raise ValueError(f"records span several settings: {sorted(keys)}")
    n, lam, method = keys.pop()
    sizes = np.array([r.size for r in records])
    finite = sizes[np.isfinite(sizes)]
    stat = (lambda f: float(f(finite))) if finite.size else (lambda f: float("nan"))
    mean_w = stat(np.mean)
    span = (fitness_range[1] - fitness_range[0]) if fitness_range else float("nan")
    return SweepSummary(
        n=n, lam=lam, method=method, trials=len(records),
        coverage=empirical_coverage(records),
        mean_width=mean_w, median_width=stat(np.median), min_width=stat(np.min),
        max_width=stat(np.max),
        frac_infinite=float(np.mean(~np.isfinite(sizes))),
        mean_finite_size=mean_w,
        mean_width_frac=mean_w / span if span and span > 0 else float("nan"),
        mean_predicted=float(np.mean([r.predicted for r in records])),
        exceed_reference=(exceed_reference_frequency(records, reference_fitness)
                          if reference_fitness is not None else float("nan")),
    )


def summarize_sweep(records, fitness_range=None, reference_fitness=None):
    """One :class:`SweepSummary` per ``(n, lam, method)``, sorted by key."""
    groups = {}
    for r in records:
        groups.setdefault((r.n, r.lam, r.method), []).append(r)
    return [summarize(groups[k], fitness_range, reference_fitness) for k in sorted(groups)]


def tradeoff_curve(summaries):
    """Rows ``(lam, mean_predicted, mean_width, frac_infinite)`` sorted by lam."""
    summaries = list(summaries)
    if len({(s.n, s.method) for s in summaries}) > 1:
        raise ValueError("trade-off curve needs summaries sharing n and method")
    return [(s.lam, s.mean_predicted, s.mean_width, s.frac_infinite)
            for s in sorted(summaries, key=lambda s: s.lam)]
