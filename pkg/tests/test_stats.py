"""Box-plot summaries and replication confidence intervals."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from authsim.kernel import RngStream
from authsim.queueing import ScenarioConfig, run_replications
from authsim.stats import (
    STAT_COLUMNS,
    EmptySampleError,
    ReplicationCI,
    SummaryStats,
    format_float,
    replication_ci,
    stats_csv_values,
    summarize,
)

samples = st.lists(
    st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False),
    min_size=1,
    max_size=300,
)


class TestSummarize:
    def test_reference_fixture(self):
        """[1,2,3,4,100]: quartiles 2/3/4, whiskers clamp to 1 and 4, one outlier."""
        s = summarize([1.0, 2.0, 3.0, 4.0, 100.0])
        assert s.q1 == 2.0
        assert s.median == 3.0
        assert s.q3 == 4.0
        assert s.iqr == 2.0
        assert s.whisker_low == 1.0
        assert s.whisker_high == 4.0
        assert s.outlier_count == 1
        assert s.min == 1.0
        assert s.max == 100.0
        assert s.count == 5
        assert s.mean == pytest.approx(22.0)

    def test_quartiles_interpolate_linearly(self):
        # Positions (n-1)*p: for n=4, q1 sits 3/4 of the way from x0 to x1.
        s = summarize([1.0, 2.0, 3.0, 4.0])
        assert s.q1 == pytest.approx(1.75)
        assert s.median == pytest.approx(2.5)
        assert s.q3 == pytest.approx(3.25)

    def test_two_point_median(self):
        assert summarize([0.0, 10.0]).median == pytest.approx(5.0)

    def test_single_sample_degenerates(self):
        s = summarize([7.0])
        assert (
            s.min == s.q1 == s.median == s.q3 == s.whisker_low == s.whisker_high == 7.0
        )
        assert s.stddev == 0.0
        assert s.outlier_count == 0

    def test_sample_stddev_uses_n_minus_1(self):
        assert summarize([2.0, 4.0]).stddev == pytest.approx(math.sqrt(2.0))

    def test_empty_sample_raises(self):
        with pytest.raises(EmptySampleError):
            summarize([])

    def test_whiskers_clamp_to_samples_not_fences(self):
        # Fence is q1 - 1.5*iqr = -1; the smallest actual sample is 1.
        s = summarize([1.0, 2.0, 3.0, 4.0, 5.0])
        assert s.whisker_low == 1.0
        assert s.whisker_high == 5.0
        assert s.outlier_count == 0

    def test_outliers_on_both_sides(self):
        x = [-50.0, 10.0, 11.0, 12.0, 13.0, 14.0, 80.0]
        s = summarize(x)
        assert s.outlier_count == 2
        assert s.whisker_low == 10.0
        assert s.whisker_high == 14.0

    def test_accepts_numpy_input(self):
        s = summarize(np.array([1.0, 2.0, 3.0]))
        assert s.count == 3
        assert s.median == 2.0

    def test_constant_data_collapses(self):
        s = summarize([5.0, 5.0, 5.0, 5.0])
        assert s.mean == s.median == s.q1 == s.q3 == 5.0
        assert s.iqr == 0.0
        assert s.outlier_count == 0

    def test_permutation_invariant(self):
        xs = RngStream(5).exponential_array(0.02, 500)
        a = summarize(xs)
        b = summarize(np.random.default_rng(9).permutation(xs))
        # Order statistics are exact; summation order may move the moments
        # by an ulp.
        assert (a.min, a.q1, a.median, a.q3, a.max) == (b.min, b.q1, b.median, b.q3, b.max)
        assert (a.whisker_low, a.whisker_high, a.outlier_count) == (
            b.whisker_low,
            b.whisker_high,
            b.outlier_count,
        )
        assert a.mean == pytest.approx(b.mean, rel=1e-12)
        assert a.stddev == pytest.approx(b.stddev, rel=1e-12)

    def test_erlang_median_matches_quantile_oracle(self):
        # Sum of two rate-100 phases; the closed-form median is known.
        draws = RngStream(101).exponential_array(0.01, 200_000)
        erlang = draws[:100_000] + draws[100_000:]
        assert summarize(erlang).median == pytest.approx(
            0.016783469900166608, rel=0.01
        )

    @given(samples)
    @settings(max_examples=200, deadline=None)
    def test_ordering_invariants(self, xs):
        s = summarize(xs)
        assert s.min <= s.q1 <= s.median <= s.q3 <= s.max
        assert s.min <= s.whisker_low <= s.whisker_high <= s.max
        assert s.count == len(xs)

    @given(samples)
    @settings(max_examples=200, deadline=None)
    def test_whiskers_respect_fences_and_count_outliers(self, xs):
        s = summarize(xs)
        x = np.asarray(xs, dtype=float)
        assert s.whisker_low >= s.q1 - 1.5 * s.iqr - 1e-9 * max(1.0, abs(s.q1))
        assert s.whisker_high <= s.q3 + 1.5 * s.iqr + 1e-9 * max(1.0, abs(s.q3))
        outside = np.count_nonzero((x < s.whisker_low) | (x > s.whisker_high))
        assert s.outlier_count == outside
        assert s.outlier_count < s.count

    @given(samples, st.floats(min_value=-10.0, max_value=10.0, allow_nan=False))
    @settings(max_examples=100, deadline=None)
    def test_shift_invariance_of_location(self, xs, shift):
        """Adding a constant shifts the quartiles by it.

        Outlier counts are deliberately not compared: a sample exactly on a
        fence can legitimately flip under floating-point shifts.
        """
        base = summarize(xs)
        moved = summarize([x + shift for x in xs])
        tol = 1e-6
        assert moved.median == pytest.approx(base.median + shift, abs=tol)
        assert moved.q1 == pytest.approx(base.q1 + shift, abs=tol)
        assert moved.q3 == pytest.approx(base.q3 + shift, abs=tol)


class TestReplicationCI:
    def test_frozen_two_rep_example(self):
        """Means 0.04/0.06: t(0.975, df=1) = 12.7062 blows the interval wide."""
        ci = replication_ci([0.04, 0.06])
        assert ci.point_estimate == pytest.approx(0.05)
        assert ci.half_width == pytest.approx(0.12706204736432092, rel=1e-12)
        assert ci.n_replications == 2
        assert ci.confidence == 0.95

    def test_contains(self):
        ci = ReplicationCI(
            point_estimate=1.0, half_width=0.1, confidence=0.95, n_replications=5
        )
        assert ci.contains(1.05)
        assert ci.contains(0.9)
        assert not ci.contains(1.11)
        assert ci.low == pytest.approx(0.9)
        assert ci.high == pytest.approx(1.1)

    def test_zero_spread_gives_zero_width(self):
        ci = replication_ci([0.3, 0.3, 0.3])
        assert ci.half_width == 0.0
        assert ci.contains(0.3)
        assert not ci.contains(0.3001)

    def test_single_rep_rejected(self):
        with pytest.raises(ValueError):
            replication_ci([0.05])

    def test_bad_confidence_rejected(self):
        with pytest.raises(ValueError):
            replication_ci([0.04, 0.06], confidence=1.0)

    def test_higher_confidence_is_wider(self):
        means = [0.9, 1.0, 1.1, 1.05, 0.95]
        assert (
            replication_ci(means, confidence=0.99).half_width
            > replication_ci(means, confidence=0.95).half_width
        )

    def test_twenty_replications_bracket_analytic_mean(self):
        cfg = ScenarioConfig(30.0, 0.020, 0.006, duration=600.0, seed=77, replications=20)
        reps = run_replications(cfg, engine="recurrence")
        ci = replication_ci([float(r.values.mean()) for r in reps])
        assert ci.contains(0.05731707317073171)

    @given(
        st.lists(
            st.floats(min_value=0.01, max_value=10.0, allow_nan=False),
            min_size=2,
            max_size=40,
        )
    )
    @settings(max_examples=100, deadline=None)
    def test_interval_contains_its_own_center(self, means):
        ci = replication_ci(means)
        assert ci.contains(ci.point_estimate)
        assert ci.half_width >= 0.0


class TestCsvSerialization:
    def test_column_order(self):
        assert STAT_COLUMNS == (
            "count",
            "mean",
            "stddev",
            "min",
            "q1",
            "median",
            "q3",
            "whisker_low",
            "whisker_high",
            "outliers",
            "max",
        )

    def test_values_align_with_columns(self):
        s = summarize([1.0, 2.0, 3.0, 4.0, 100.0])
        cells = stats_csv_values(s)
        assert len(cells) == len(STAT_COLUMNS)
        row = dict(zip(STAT_COLUMNS, cells))
        assert row["count"] == "5"
        assert row["q1"] == "2.0"
        assert row["outliers"] == "1"
        assert float(row["mean"]) == s.mean

    def test_format_float_round_trips(self):
        for x in (0.1, 1.0 / 3.0, 0.026719559491602953, 1e-12):
            assert float(format_float(x)) == x
