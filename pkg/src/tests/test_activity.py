"""
Unit tests for activity statistics, log binning and tail estimation.
"""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from geomobility.activity import (
    ACTIVITY_THRESHOLDS,
    decade_span,
    distribution_points,
    estimate_tail_exponent,
    events_per_user_distribution,
    events_per_user_ratio,
    frequency_of,
    log_bin,
    summarize,
    waiting_time_distribution,
)
from geomobility.errors import DomainError, EmptyInputError, InsufficientDataError
from tests.conftest import timeline

points = st.lists(
    st.tuples(
        st.floats(min_value=1e-3, max_value=1e6),
        st.floats(min_value=-1e3, max_value=1e3),
    ),
    min_size=1,
    max_size=60,
)


@pytest.fixture
def timelines():
    return [
        timeline("a", [(0, 0.0, 0.0), (3600, 0.0, 0.0), (10800, 1.0, 1.0)]),
        timeline("b", [(0, 0.0, 0.0), (36000, 0.00001, 0.0)]),
        timeline("c", [(50, 2.0, 2.0)]),
        timeline("d", [(7, 3.0, 3.0), (7, 3.0, 3.0), (8, 3.0, 3.0)]),
    ]


class TestSummarize:
    """Test cases for summarize."""

    def test_counts(self, timelines) -> None:
        """Test user and event totals and their ratio."""
        summary = summarize(timelines)
        assert summary.n_users == 4
        assert summary.n_events == 9
        assert summary.avg_events_per_user == 2.25
        assert summary.avg_events_per_user * summary.n_users == summary.n_events

    def test_pooled_waiting_time(self, timelines) -> None:
        """Test the waiting time averaged over every consecutive pair."""
        # waits: 3600, 7200, 36000, 0, 1 seconds
        summary = summarize(timelines)
        assert summary.avg_waiting_time_hours == pytest.approx(46801 / 5 / 3600)

    def test_per_user_waiting_time(self, timelines) -> None:
        """Test the mean of per-user mean waits skips single-event users."""
        summary = summarize(timelines)
        expected = (1.5 + 10.0 + 0.5 / 3600) / 3
        assert summary.avg_waiting_time_hours_per_user == pytest.approx(expected)

    def test_distinct_locations_rounded(self, timelines) -> None:
        """Test locations are counted after rounding to the given precision."""
        # b's second point rounds onto its first at 4 decimals
        summary = summarize(timelines)
        assert summary.avg_locations_per_user == (2 + 1 + 1 + 1) / 4
        assert summarize(timelines, location_precision=5).avg_locations_per_user == 6 / 4

    def test_thresholds_strict(self) -> None:
        """Test activity thresholds count users strictly above each bound."""
        exactly_50 = timeline("u", [(t, 0.0, 0.0) for t in range(50)])
        over_50 = timeline("v", [(t, 0.0, 0.0) for t in range(51)])
        summary = summarize([exactly_50, over_50])
        assert summary.users_exceeding == {50: 1, 100: 0, 500: 0, 1000: 0}
        assert tuple(summary.users_exceeding) == ACTIVITY_THRESHOLDS

    def test_empty(self) -> None:
        """Test summarizing no timelines is an empty-input error."""
        with pytest.raises(EmptyInputError):
            summarize([])

    def test_single_event_users(self) -> None:
        """Test users with one event contribute no waits."""
        summary = summarize([timeline("u", [(1, 0.0, 0.0)])])
        assert summary.avg_waiting_time_hours == 0.0
        assert summary.avg_events_per_user == 1.0


class TestDistributions:
    """Test cases for distribution helpers."""

    def test_events_per_user(self, timelines) -> None:
        """Test the events-per-user histogram."""
        assert events_per_user_distribution(timelines) == {1: 1, 2: 1, 3: 2}

    def test_waiting_times(self, timelines) -> None:
        """Test every consecutive gap is reported, zero included."""
        assert sorted(waiting_time_distribution(timelines)) == [0, 1, 3600, 7200, 36000]

    def test_points_drop_zero(self) -> None:
        """Test zero values are dropped before log binning."""
        frequencies = frequency_of([0, 0, 5, 5, 5, 60])
        assert frequencies == {0: 2, 5: 3, 60: 1}
        assert distribution_points(frequencies) == [(5.0, 3.0), (60.0, 1.0)]

    def test_decade_span(self) -> None:
        """Test decade span over positive values."""
        assert decade_span([1, 10, 1000, 0]) == pytest.approx(3.0)
        assert decade_span([]) == 0.0

    def test_table_totals_ratio(self) -> None:
        """Test the events-per-user ratio of published corpus totals."""
        assert round(events_per_user_ratio(6_304_176, 473_956), 1) == 13.3


class TestLogBin:
    """Test cases for log_bin."""

    def test_two_decades(self) -> None:
        """Test bin counts, means and geometric centres over two decades."""
        pts = [(float(x), float(x)) for x in range(1, 101)]
        binned = log_bin(pts, bin_ratio=10.0)
        assert [b.count for b in binned.bins] == [9, 91]
        assert binned.bins[0].y_mean == pytest.approx(5.0)
        assert binned.bins[0].x == pytest.approx(np.exp(np.mean(np.log(range(1, 10)))))

    def test_empty(self) -> None:
        """Test binning no points gives no bins."""
        assert log_bin([]).bins == []

    def test_single_point(self) -> None:
        """Test a single point lands in its own bin."""
        binned = log_bin([(3.0, 7.0)])
        (only,) = binned.bins
        assert only.x == pytest.approx(3.0)
        assert (only.y_mean, only.count) == (7.0, 1)

    @pytest.mark.parametrize("x", [0.0, -1.0, float("inf")])
    def test_rejects_bad_x(self, x: float) -> None:
        """Test non-positive or infinite x values are rejected."""
        with pytest.raises(DomainError):
            log_bin([(1.0, 1.0), (x, 1.0)])

    def test_rejects_bad_ratio(self) -> None:
        """Test a bin ratio of one is rejected."""
        with pytest.raises(DomainError):
            log_bin([(1.0, 1.0)], bin_ratio=1.0)

    @given(points)
    def test_mass_preserved(self, pts) -> None:
        """Test binning keeps every point and orders bins by x."""
        binned = log_bin(pts)
        assert binned.total_count == len(pts)
        xs = [b.x for b in binned.bins]
        assert xs == sorted(set(xs))

    @given(points, st.randoms())
    def test_permutation_invariant(self, pts, random) -> None:
        """Test input order does not change the bins."""
        shuffled = list(pts)
        random.shuffle(shuffled)
        a, b = log_bin(pts), log_bin(shuffled)
        assert [bin.count for bin in a.bins] == [bin.count for bin in b.bins]
        for left, right in zip(a.bins, b.bins):
            assert left.x == pytest.approx(right.x)
            assert left.y_mean == pytest.approx(right.y_mean, abs=1e-9)


class TestTailExponent:
    """Test cases for estimate_tail_exponent."""

    def test_recovers_pareto(self) -> None:
        """Test the estimator recovers a known Pareto exponent."""
        rng = np.random.default_rng(11)
        samples = (1.0 - rng.random(100_000)) ** (-1.0 / 1.5)
        assert estimate_tail_exponent(samples, x_min=1.0) == pytest.approx(2.5, abs=0.05)

    def test_too_few(self) -> None:
        """Test too few samples above x_min is an error."""
        with pytest.raises(InsufficientDataError):
            estimate_tail_exponent([1.0, 2.0, 3.0], x_min=1.0)

    def test_degenerate(self) -> None:
        """Test samples all at x_min are an error."""
        with pytest.raises(InsufficientDataError):
            estimate_tail_exponent([5.0] * 20, x_min=5.0)

    def test_bad_xmin(self) -> None:
        """Test a non-positive x_min is a domain error."""
        with pytest.raises(DomainError):
            estimate_tail_exponent([1.0] * 20, x_min=0.0)
