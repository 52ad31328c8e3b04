"""Event schedule ordering, clock discipline, and random stream behavior."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from authsim.kernel import Event, EventSchedule, PastEventError, RngStream, derive_seed


class TestEventSchedule:
    def test_executes_in_time_order(self):
        sched = EventSchedule()
        fired = []
        for t in (3.0, 1.0, 2.0):
            sched.schedule(t, lambda t=t: fired.append(t))
        sched.run_until(10.0)
        assert fired == [1.0, 2.0, 3.0]

    def test_ties_break_by_insertion_order(self):
        sched = EventSchedule()
        fired = []
        for tag in "abc":
            sched.schedule(5.0, lambda tag=tag: fired.append(tag))
        sched.run_until(5.0)
        assert fired == ["a", "b", "c"]

    def test_run_until_executes_only_up_to_horizon(self):
        """Three events at t=1,2,3 with horizon 2.5: exactly two fire."""
        sched = EventSchedule()
        fired = []
        for t in (1.0, 2.0, 3.0):
            sched.schedule(t, lambda t=t: fired.append(t))
        executed = sched.run_until(2.5)
        assert executed == 2
        assert fired == [1.0, 2.0]
        assert len(sched) == 1

    def test_clock_lands_on_horizon(self):
        sched = EventSchedule()
        sched.schedule(1.0, lambda: None)
        sched.run_until(7.5)
        assert sched.now == 7.5

    def test_event_at_horizon_fires(self):
        sched = EventSchedule()
        fired = []
        sched.schedule(2.5, lambda: fired.append(True))
        sched.run_until(2.5)
        assert fired == [True]

    def test_actions_can_schedule_within_horizon(self):
        """A chain of self-scheduling events runs to completion in one call."""
        sched = EventSchedule()
        fired = []

        def step():
            fired.append(sched.now)
            if sched.now < 5.0:
                sched.schedule(sched.now + 1.0, step)

        sched.schedule(1.0, step)
        sched.run_until(10.0)
        assert fired == [1.0, 2.0, 3.0, 4.0, 5.0]

    def test_schedule_in_past_rejected(self):
        sched = EventSchedule()
        sched.schedule(4.0, lambda: None)
        sched.run_until(4.0)
        with pytest.raises(PastEventError):
            sched.schedule(3.0, lambda: None)

    def test_run_until_backwards_rejected(self):
        sched = EventSchedule()
        sched.run_until(5.0)
        with pytest.raises(PastEventError):
            sched.run_until(4.0)

    def test_schedule_at_current_time_allowed(self):
        sched = EventSchedule()
        sched.run_until(2.0)
        fired = []
        sched.schedule(2.0, lambda: fired.append(True))
        sched.run_until(2.0)
        assert fired == [True]

    def test_peek_does_not_execute_or_advance(self):
        sched = EventSchedule()
        sched.schedule(3.0, lambda: None)
        event = sched.peek()
        assert event.fire_at == 3.0
        assert sched.now == 0.0
        assert len(sched) == 1

    def test_peek_empty_returns_none(self):
        assert EventSchedule().peek() is None

    def test_pop_advances_clock_without_executing(self):
        sched = EventSchedule()
        fired = []
        sched.schedule(2.0, lambda: fired.append(True))
        event = sched.pop()
        assert sched.now == 2.0
        assert fired == []
        event.action()
        assert fired == [True]

    def test_pop_empty_raises(self):
        with pytest.raises(IndexError):
            EventSchedule().pop()

    def test_event_ordering_dunder(self):
        early = Event(1.0, 5, lambda: None)
        late = Event(2.0, 0, lambda: None)
        tie = Event(1.0, 6, lambda: None)
        assert early < late
        assert early < tie

    @given(
        times=st.lists(
            st.floats(min_value=0.0, max_value=100.0, allow_nan=False),
            min_size=1,
            max_size=50,
        )
    )
    @settings(max_examples=100, deadline=None)
    def test_clock_never_moves_backward(self, times):
        """Execution order is sorted regardless of scheduling order."""
        sched = EventSchedule()
        seen = []
        for t in times:
            sched.schedule(t, lambda: seen.append(sched.now))
        sched.run_until(100.0)
        assert seen == sorted(seen)
        assert len(seen) == len(times)


class TestDeriveSeed:
    def test_deterministic_across_calls(self):
        assert derive_seed(1, "arrivals") == derive_seed(1, "arrivals")

    def test_frozen_value(self):
        """Pinned so seeds stay stable across platforms and releases."""
        assert derive_seed(1, "arrivals") == 1601132313184382953
        assert derive_seed(1, "rep", 0) == 16195459403563762794

    def test_labels_and_base_both_matter(self):
        seeds = {
            derive_seed(1, "arrivals"),
            derive_seed(1, "service-link"),
            derive_seed(2, "arrivals"),
            derive_seed(1, "arrivals", 0),
        }
        assert len(seeds) == 4

    def test_fits_in_64_bits(self):
        for label in ("a", "b", "c"):
            assert 0 <= derive_seed(123, label) < 2**64


class TestRngStream:
    def test_same_seed_same_sequence(self):
        a, b = RngStream(42), RngStream(42)
        assert [a.uniform() for _ in range(10)] == [b.uniform() for _ in range(10)]

    def test_different_seeds_differ(self):
        a, b = RngStream(1), RngStream(2)
        assert [a.uniform() for _ in range(5)] != [b.uniform() for _ in range(5)]

    def test_scalar_uniforms_match_bulk_draw(self):
        """One-at-a-time and array draws walk the same stream."""
        a, b = RngStream(7), RngStream(7)
        singles = np.array([a.uniform() for _ in range(1000)])
        bulk = b._gen.random(1000)
        assert np.array_equal(singles, bulk)

    def test_scalar_exponentials_match_array_draw(self):
        # math.log1p and numpy's log1p may disagree in the last ulp, nothing more.
        a, b = RngStream(7), RngStream(7)
        singles = np.array([a.exponential(2.0) for _ in range(1000)])
        bulk = b.exponential_array(2.0, 1000)
        np.testing.assert_allclose(singles, bulk, rtol=5e-16, atol=0.0)

    def test_exponential_mean_roughly_right(self):
        draws = RngStream(3).exponential_array(0.25, 200_000)
        assert draws.mean() == pytest.approx(0.25, rel=0.02)

    def test_million_draw_mean_within_one_percent(self):
        draws = RngStream(17).exponential_array(0.006, 1_000_000)
        assert draws.mean() == pytest.approx(0.006, rel=0.01)

    def test_million_draw_variance_within_three_percent(self):
        # Exponential variance equals the squared mean.
        draws = RngStream(19).exponential_array(1.0, 1_000_000)
        assert draws.var(ddof=1) == pytest.approx(1.0, rel=0.03)

    @given(st.integers(min_value=0, max_value=2**32))
    @settings(max_examples=50, deadline=None)
    def test_exponential_strictly_positive(self, seed):
        stream = RngStream(seed)
        assert all(stream.exponential(1e-9) > 0.0 for _ in range(20))
        assert (stream.exponential_array(1e-9, 1000) > 0.0).all()

    def test_invalid_mean_rejected(self):
        stream = RngStream(0)
        with pytest.raises(ValueError):
            stream.exponential(0.0)
        with pytest.raises(ValueError):
            stream.exponential(-1.0)
        with pytest.raises(ValueError):
            stream.exponential_array(0.0, 3)

    def test_negative_count_rejected(self):
        with pytest.raises(ValueError):
            RngStream(0).exponential_array(1.0, -1)

    def test_inverse_cdf_transform(self):
        """Draws are -mean*log1p(-u) of the underlying uniforms."""
        mean = 3.0
        u = RngStream(11)._gen.random(100)
        expected = -mean * np.log1p(-u)
        got = RngStream(11).exponential_array(mean, 100)
        assert np.array_equal(got, expected)
