"""Concordance counting and the paired significance test."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from survbesa.core import SurvivalDataset
from survbesa.errors import (
    DegenerateVariance,
    DimensionMismatch,
    NoComparablePairs,
)
from survbesa.metrics import c_index, comparable_pairs, paired_t_test


def ds(times, events, d=1):
    times = np.asarray(times, float)
    return SurvivalDataset(np.zeros((times.size, d)), times, events)


class TestComparablePairs:
    def test_small_case_by_hand(self):
        # i must be an observed event strictly earlier than j's time
        data = ds([1.0, 2.0, 3.0], [1, 0, 1])
        pairs = set(map(tuple, comparable_pairs(data)))
        assert pairs == {(0, 1), (0, 2), (2, 1)} - {(2, 1)}  # 3 > 2, so (2,1) absent
        assert pairs == {(0, 1), (0, 2)}

    def test_censored_first_element_excluded(self):
        data = ds([1.0, 2.0], [0, 1])
        assert comparable_pairs(data).shape[0] == 0

    def test_ties_not_comparable(self):
        data = ds([2.0, 2.0], [1, 1])
        assert comparable_pairs(data).shape[0] == 0

    def test_count_fully_observed(self):
        # all events, distinct times: n*(n-1)/2 ordered pairs
        data = ds([1.0, 2.0, 3.0, 4.0], [1, 1, 1, 1])
        assert comparable_pairs(data).shape[0] == 6


class TestCIndex:
    def test_perfect_and_reversed(self):
        data = ds([1.0, 2.0, 3.0], [1, 1, 1])
        assert c_index([1.0, 2.0, 3.0], data) == 1.0
        assert c_index([3.0, 2.0, 1.0], data) == 0.0

    def test_partial(self):
        data = ds([1.0, 2.0, 3.0], [1, 1, 1])
        # pairs (0,1), (0,2), (1,2); predictions order only (0,1), (0,2)
        assert c_index([1.0, 5.0, 4.0], data) == pytest.approx(2 / 3)

    def test_tie_scoring(self):
        data = ds([1.0, 2.0], [1, 1])
        assert c_index([1.0, 1.0], data) == 0.0
        assert c_index([1.0, 1.0], data, tie_half=True) == 0.5

    def test_censoring_changes_pair_set(self):
        data = ds([1.0, 2.0, 3.0], [1, 0, 1])
        # only pairs from record 0; both ranked correctly
        assert c_index([1.0, 9.0, 5.0], data) == 1.0

    def test_errors(self):
        data = ds([1.0, 2.0], [0, 0])
        with pytest.raises(NoComparablePairs):
            c_index([1.0, 2.0], data)
        with pytest.raises(DimensionMismatch):
            c_index([1.0], ds([1.0, 2.0], [1, 1]))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(min_value=0, max_value=2**32 - 1))
    def test_bounded_and_complement(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(3, 20))
        times = rng.uniform(1, 10, size=n)
        events = rng.integers(0, 2, size=n)
        events[0] = 1
        times[0] = 0.5  # guarantee a comparable pair
        data = ds(times, events)
        pred = rng.normal(size=n)
        c = c_index(pred, data)
        assert 0.0 <= c <= 1.0
        # reversing predictions flips every strict comparison
        if np.unique(pred).size == n:
            assert c_index(-pred, data) == pytest.approx(1.0 - c)


class TestPairedTTest:
    def test_zero_mean_difference(self):
        t, p = paired_t_test([1.0, 2.0], [2.0, 1.0])
        assert t == 0.0
        assert p == 1.0

    def test_matches_scipy_reference(self):
        from scipy import stats

        rng = np.random.default_rng(42)
        a = rng.normal(size=12)
        b = a + rng.normal(scale=0.5, size=12) + 0.3
        t, p = paired_t_test(a, b)
        ref = stats.ttest_rel(a, b)
        assert t == pytest.approx(ref.statistic, rel=1e-12)
        assert p == pytest.approx(ref.pvalue, rel=1e-12)

    def test_symmetry(self):
        rng = np.random.default_rng(42)
        a = rng.normal(size=8)
        b = rng.normal(size=8)
        ta, pa = paired_t_test(a, b)
        tb, pb = paired_t_test(b, a)
        assert ta == pytest.approx(-tb)
        assert pa == pytest.approx(pb)

    def test_degenerate(self):
        with pytest.raises(DegenerateVariance):
            paired_t_test([1.0, 1.0], [0.5, 0.5])  # constant difference
        with pytest.raises(DegenerateVariance):
            paired_t_test([1.0], [0.5])
        with pytest.raises(DimensionMismatch):
            paired_t_test([1.0, 2.0], [1.0])
