"""Delay-sample summaries: box-plot statistics and replication confidence
intervals.

Quartiles use linear interpolation between order statistics (position
``(n - 1) * p``).  Whiskers extend to the most extreme samples still within
1.5 interquartile ranges of the nearer quartile; samples outside are counted
as outliers.  Confidence intervals over per-replication means use the
Student t distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import t as student_t

__all__ = [
    "EmptySampleError",
    "SummaryStats",
    "ReplicationCI",
    "WHISKER_SPAN",
    "summarize",
    "replication_ci",
    "format_float",
    "STAT_COLUMNS",
    "stats_csv_values",
]

WHISKER_SPAN = 1.5


class EmptySampleError(ValueError):
    """Raised when a summary is requested for an empty sample."""


@dataclass(frozen=True)
class SummaryStats:
    """Five-number summary plus mean, spread, and outlier count."""

    count: int
    mean: float
    stddev: float
    min: float
    q1: float
    median: float
    q3: float
    iqr: float
    whisker_low: float
    whisker_high: float
    outlier_count: int
    max: float


def summarize(values) -> SummaryStats:
    """Summarize a sample of delays.

    Raises:
        EmptySampleError: when ``values`` is empty.
    """
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise EmptySampleError("cannot summarize an empty sample")
    q1, median, q3 = (float(v) for v in np.quantile(x, [0.25, 0.5, 0.75]))
    iqr = q3 - q1
    lo_fence = q1 - WHISKER_SPAN * iqr
    hi_fence = q3 + WHISKER_SPAN * iqr
    inside = x[(x >= lo_fence) & (x <= hi_fence)]
    # The quartiles themselves are inside the fences, so ``inside`` is
    # never empty.
    stddev = float(x.std(ddof=1)) if x.size > 1 else 0.0
    return SummaryStats(
        count=int(x.size),
        mean=float(x.mean()),
        stddev=stddev,
        min=float(x.min()),
        q1=q1,
        median=median,
        q3=q3,
        iqr=iqr,
        whisker_low=float(inside.min()),
        whisker_high=float(inside.max()),
        outlier_count=int(x.size - inside.size),
        max=float(x.max()),
    )


@dataclass(frozen=True)
class ReplicationCI:
    """Two-sided confidence interval for the mean of replication means."""

    point_estimate: float
    half_width: float
    confidence: float
    n_replications: int

    @property
    def low(self) -> float:
        return self.point_estimate - self.half_width

    @property
    def high(self) -> float:
        return self.point_estimate + self.half_width

    def contains(self, value: float) -> bool:
        return abs(value - self.point_estimate) <= self.half_width


def replication_ci(per_rep_means, confidence: float = 0.95) -> ReplicationCI:
    """Student-t interval over independent replication means.

    Requires at least two replications; with fewer there is no spread
    estimate to build an interval from.
    """
    if not 0.0 < confidence < 1.0:
        raise ValueError(f"confidence must lie in (0, 1), got {confidence!r}")
    m = np.asarray(per_rep_means, dtype=float)
    n = int(m.size)
    if n < 2:
        raise ValueError(f"need at least two replication means, got {n}")
    point = float(m.mean())
    spread = float(m.std(ddof=1))
    critical = float(student_t.ppf(0.5 + confidence / 2.0, n - 1))
    return ReplicationCI(
        point_estimate=point,
        half_width=critical * spread / math.sqrt(n),
        confidence=confidence,
        n_replications=n,
    )


def format_float(x: float) -> str:
    """Shortest decimal string that round-trips to the same float."""
    return repr(float(x))


STAT_COLUMNS = (
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


def stats_csv_values(s: SummaryStats) -> list[str]:
    """Serialized fields in :data:`STAT_COLUMNS` order (iqr is derived, not emitted)."""
    return [
        str(s.count),
        format_float(s.mean),
        format_float(s.stddev),
        format_float(s.min),
        format_float(s.q1),
        format_float(s.median),
        format_float(s.q3),
        format_float(s.whisker_low),
        format_float(s.whisker_high),
        str(s.outlier_count),
        format_float(s.max),
    ]
