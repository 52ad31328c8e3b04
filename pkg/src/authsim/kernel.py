"""Event-driven simulation core: clock, pending-event schedule, random streams.

The kernel knows nothing about queues or protocols.  Callers schedule
zero-argument actions at absolute times; :meth:`EventSchedule.run_until`
executes them in (fire time, insertion order) and advances the clock, which
never moves backward.  Randomness comes from :class:`RngStream`, one instance
per independent stochastic input, so that changing one model parameter never
perturbs the sample sequence of an unrelated input.
"""

from __future__ import annotations

import hashlib
import heapq
import math
from typing import Callable, Optional

import numpy as np

__all__ = [
    "Event",
    "EventSchedule",
    "PastEventError",
    "RngStream",
    "derive_seed",
]

Action = Callable[[], None]


class PastEventError(ValueError):
    """Raised when an event or horizon lies before the current clock."""


class Event:
    """A scheduled action.  Events order by (fire_at, seq)."""

    __slots__ = ("fire_at", "seq", "action")

    def __init__(self, fire_at: float, seq: int, action: Action) -> None:
        self.fire_at = fire_at
        self.seq = seq
        self.action = action

    def __lt__(self, other: "Event") -> bool:
        return (self.fire_at, self.seq) < (other.fire_at, other.seq)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Event(fire_at={self.fire_at!r}, seq={self.seq})"


class EventSchedule:
    """Time-ordered pending actions plus the simulation clock.

    Ties in fire time break by insertion order, so a run is fully
    reproducible for a fixed event program.
    """

    def __init__(self) -> None:
        self._heap: list[tuple[float, int, Action]] = []
        self._seq = 0
        self._now = 0.0

    @property
    def now(self) -> float:
        """Current simulation time in seconds."""
        return self._now

    def __len__(self) -> int:
        return len(self._heap)

    def schedule(self, fire_at: float, action: Action) -> Event:
        """Add ``action`` at absolute time ``fire_at``.

        Raises:
            PastEventError: if ``fire_at`` precedes the current clock.
        """
        if fire_at < self._now:
            raise PastEventError(
                f"cannot schedule at t={fire_at!r} before current clock t={self._now!r}"
            )
        seq = self._seq
        self._seq = seq + 1
        heapq.heappush(self._heap, (fire_at, seq, action))
        return Event(fire_at, seq, action)

    def peek(self) -> Optional[Event]:
        """The next pending event without executing it, or None if empty."""
        if not self._heap:
            return None
        return Event(*self._heap[0])

    def pop(self) -> Event:
        """Remove and return the next event, advancing the clock to it.

        The action is returned, not executed.
        """
        if not self._heap:
            raise IndexError("pop from an empty schedule")
        fire_at, seq, action = heapq.heappop(self._heap)
        self._now = fire_at
        return Event(fire_at, seq, action)

    def run_until(self, horizon: float) -> int:
        """Execute every pending action with fire_at <= ``horizon``, in order.

        Actions may schedule further events; any that land within the horizon
        are executed in the same call.  The clock finishes exactly at
        ``horizon`` and later events stay pending.  Returns the number of
        actions executed.
        """
        if horizon < self._now:
            raise PastEventError(
                f"horizon t={horizon!r} precedes current clock t={self._now!r}"
            )
        heap = self._heap
        pop = heapq.heappop
        executed = 0
        while heap and heap[0][0] <= horizon:
            fire_at, _seq, action = pop(heap)
            self._now = fire_at
            action()
            executed += 1
        self._now = horizon
        return executed


def derive_seed(base_seed: int, *labels: object) -> int:
    """Derive an independent 64-bit child seed from a base seed and labels.

    Hash-based, so streams keyed by different labels are decorrelated and a
    stream's seed depends only on its own labels.  Stable across processes
    and platforms.
    """
    material = ":".join([str(int(base_seed))] + [str(label) for label in labels])
    digest = hashlib.sha256(material.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


class RngStream:
    """Seedable random source for one stochastic input.

    A given seed yields the same sample sequence on every run, and drawing
    values one at a time or as arrays walks the identical sequence, which is
    what lets the event-driven and vectorized engines consume the same
    numbers.
    """

    __slots__ = ("seed", "_gen", "_next_uniform")

    def __init__(self, seed: int) -> None:
        self.seed = int(seed)
        self._gen = np.random.Generator(np.random.PCG64(self.seed))
        self._next_uniform = self._gen.random  # bound once; hot path

    def uniform(self) -> float:
        """One draw in [0, 1)."""
        return self._next_uniform()

    def exponential(self, mean: float) -> float:
        """One exponential draw with the given mean, strictly positive.

        Inverse-CDF transform ``-mean * log1p(-u)``; a zero draw (u == 0)
        is redrawn so service and interarrival times never collapse to 0.
        """
        if mean <= 0.0:
            raise ValueError(f"exponential mean must be positive, got {mean!r}")
        x = -mean * math.log1p(-self._next_uniform())
        while x <= 0.0:
            x = -mean * math.log1p(-self._next_uniform())
        return x

    def exponential_array(self, mean: float, n: int) -> np.ndarray:
        """``n`` exponential draws, same transform and stream as :meth:`exponential`."""
        if mean <= 0.0:
            raise ValueError(f"exponential mean must be positive, got {mean!r}")
        if n < 0:
            raise ValueError(f"sample count must be non-negative, got {n!r}")
        x = -mean * np.log1p(-self._gen.random(n))
        while True:
            zeros = np.nonzero(x <= 0.0)[0]
            if zeros.size == 0:
                return x
            x[zeros] = -mean * np.log1p(-self._gen.random(zeros.size))
