import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fcsconf.conformal import CandidateGrid, GridConfidenceSet
from fcsconf.metrics import (
    empirical_coverage,
    exceed_reference_frequency,
    jaccard_distance,
    summarize,
    summarize_sweep,
    tradeoff_curve,
)
from fcsconf.simulate import TrialRecord
from fcsconf.split import StaircaseSet

G = CandidateGrid(0.0, 1.9, 0.1)  # 20 values


def gset(idx):
    flags = np.zeros(G.count, bool)
    flags[list(idx)] = True
    return GridConfidenceSet(G, flags)


def rec(cs, covered=True, trial=0, method="fcs_full", n=8, lam=0.0, predicted=0.0, label=0.0):
    size = cs.width if isinstance(cs, GridConfidenceSet) else cs.size
    return TrialRecord(trial, method, n, lam, 0, label, label, predicted, cs, covered, size)


def test_coverage_examples():
    assert empirical_coverage([rec(gset([1]))] * 4) == 1.0
    assert empirical_coverage([rec(gset([1]), covered=k % 2 == 0) for k in range(10)]) == 0.5
    with pytest.raises(ValueError):
        empirical_coverage([])
    with pytest.raises(ValueError):
        empirical_coverage([rec(gset([1])), rec(StaircaseSet(((0.0, 1.0),)))])


def test_half_spacing_boundary_is_covered():
    cs = gset([5])  # value 0.5
    assert cs.covers(0.55) and cs.covers(0.45)
    assert not cs.covers(0.56)


def test_jaccard_examples():
    assert jaccard_distance(gset(range(3, 8)), gset(range(3, 8))) == 0.0
    assert jaccard_distance(gset([1, 2]), gset([5, 6])) == 1.0
    assert jaccard_distance(gset(range(5)), gset(range(10))) == 0.5
    assert jaccard_distance(gset([]), gset([])) == 0.0
    other = GridConfidenceSet(CandidateGrid(0.0, 1.9, 0.05), np.zeros(39, bool))
    with pytest.raises(ValueError):
        jaccard_distance(gset([1]), other)


subsets = st.sets(st.integers(0, 19), max_size=20).map(gset)


@settings(max_examples=200, deadline=None)
@given(subsets, subsets, subsets)
def test_jaccard_is_a_metric(a, b, c):
    dab = jaccard_distance(a, b)
    assert dab == jaccard_distance(b, a)
    assert (dab == 0) == (a == b)
    assert 0 <= dab <= 1
    assert jaccard_distance(a, c) <= dab + jaccard_distance(b, c) + 1e-12


def test_exceed_reference_examples():
    recs = [rec(gset([2, 3])), rec(gset([5])), rec(gset([])), rec(gset([9, 12]))]
    # minima 0.2, 0.5, none, 0.9
    assert exceed_reference_frequency(recs, 0.4) == 0.5
    assert exceed_reference_frequency(recs[:2] + recs[3:], -1.0) == 1.0
    assert exceed_reference_frequency(recs, 5.0) == 0.0


@settings(max_examples=100, deadline=None)
@given(st.lists(st.booleans(), min_size=1, max_size=30), st.lists(st.booleans(), min_size=1, max_size=30))
def test_coverage_of_union_is_weighted_mean(a, b):
    ra = [rec(gset([1]), covered=c) for c in a]
    rb = [rec(gset([1]), covered=c) for c in b]
    whole = empirical_coverage(ra + rb)
    assert whole == pytest.approx((len(a) * empirical_coverage(ra) + len(b) * empirical_coverage(rb))
                                  / (len(a) + len(b)))


def test_summary_with_infinite_sets():
    recs = [rec(StaircaseSet(((0.0, 1.0),)), method="staircase", predicted=1.0),
            rec(StaircaseSet(((-1.0, 2.0),)), method="staircase", covered=False, predicted=2.0),
            rec(StaircaseSet(((-math.inf, math.inf),)), method="staircase", predicted=3.0)]
    s = summarize(recs, fitness_range=(0.0, 4.0))
    assert s.frac_infinite == pytest.approx(1 / 3)
    assert s.mean_width == 2.0 and s.median_width == 2.0
    assert s.min_width == 1.0 and s.max_width == 3.0
    assert s.mean_finite_size == 2.0
    assert s.mean_width_frac == 0.5
    assert s.coverage == pytest.approx(2 / 3)
    assert s.mean_predicted == 2.0
    assert math.isnan(s.exceed_reference)


def test_summary_permutation_invariant():
    rng = np.random.default_rng(0)
    recs = [rec(gset(rng.choice(20, size=rng.integers(1, 8), replace=False)),
                covered=bool(rng.integers(2)), predicted=float(rng.normal())) for _ in range(15)]
    a = summarize(recs, (0, 1), 0.3)
    b = summarize([recs[i] for i in rng.permutation(15)], (0, 1), 0.3)
    for key, val in a.as_row().items():
        assert val == pytest.approx(b.as_row()[key])


def test_summary_rejects_mixed_settings():
    with pytest.raises(ValueError):
        summarize([rec(gset([1]), lam=0.0), rec(gset([1]), lam=1.0)])


def test_sweep_and_tradeoff():
    recs = [rec(gset(range(k + 1)), lam=lam, predicted=lam) for lam in (4.0, 0.0, 2.0) for k in range(3)]
    sums = summarize_sweep(recs)
    assert [s.lam for s in sums] == [0.0, 2.0, 4.0]
    rows = tradeoff_curve(reversed(sums))
    assert [r[0] for r in rows] == [0.0, 2.0, 4.0]
    assert rows[1][1] == 2.0 and rows[1][2] == pytest.approx(0.2)
    assert tradeoff_curve(sums[:1]) == [(0.0, 0.0, pytest.approx(0.2), 0.0)]
    with pytest.raises(ValueError):
        tradeoff_curve(summarize_sweep(recs + [rec(gset([1]), method="scs_full")]))
