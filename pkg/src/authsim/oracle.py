"""Closed-form results for two M/M/1 queues in series.

Total time in system (sojourn) at a stable M/M/1 station with arrival rate
``lam`` and service rate ``mu`` is exponential with rate ``mu - lam``.  The
departure process of a stable M/M/1 queue is again Poisson at the arrival
rate (Burke's theorem) and the sojourn times of the two stations are
independent, so the end-to-end delay of the cascade is the sum of two
exponentials:

* rates differ: hypoexponential,
  ``F(t) = 1 - (r2*exp(-r1*t) - r1*exp(-r2*t)) / (r2 - r1)``
* rates equal: Erlang-2, ``F(t) = 1 - (1 + r*t) * exp(-r*t)``

with ``r_i = mu_i - lam``.  These expressions are the reference that
simulation output is validated against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import brentq

__all__ = [
    "CascadeParams",
    "StabilityError",
    "EQUAL_RATE_REL_TOL",
    "utilization",
    "mm1_mean_sojourn",
    "mm1_sojourn_cdf",
    "cascade_mean_sojourn",
    "cascade_sojourn_cdf",
    "cascade_quantile",
]

# Relative gap below which the two net rates are treated as equal and the
# Erlang-2 branch is used; the general form loses precision to cancellation
# long before this point matters.
EQUAL_RATE_REL_TOL = 1e-9


class StabilityError(ValueError):
    """Arrival rate at or above a station's service rate (utilization >= 1)."""


@dataclass(frozen=True)
class CascadeParams:
    """Rates of the two-station cascade.

    ``mu1`` is the service rate of the first station (the network link,
    1 / mean link latency); ``mu2`` the second (the authentication server,
    1 / mean service time).  Both stations see the same arrival rate.
    """

    arrival_rate: float
    mu1: float
    mu2: float

    @classmethod
    def from_service_times(
        cls, arrival_rate: float, link_latency: float, auth_service_time: float
    ) -> "CascadeParams":
        """Build from mean service *times* in seconds instead of rates."""
        if link_latency <= 0.0:
            raise ValueError(f"link latency must be positive, got {link_latency!r}")
        if auth_service_time <= 0.0:
            raise ValueError(
                f"auth service time must be positive, got {auth_service_time!r}"
            )
        return cls(arrival_rate, 1.0 / link_latency, 1.0 / auth_service_time)

    def net_rates(self) -> tuple[float, float]:
        """(mu1 - lam, mu2 - lam), validating stability of both stations."""
        _check_rates(self.arrival_rate, self.mu1, "station 1 (link)")
        _check_rates(self.arrival_rate, self.mu2, "station 2 (auth)")
        return self.mu1 - self.arrival_rate, self.mu2 - self.arrival_rate


def _check_rates(arrival_rate: float, mu: float, label: str) -> None:
    if arrival_rate < 0.0:
        raise ValueError(f"arrival rate must be non-negative, got {arrival_rate!r}")
    if mu <= 0.0:
        raise ValueError(f"service rate must be positive, got {mu!r}")
    if arrival_rate >= mu:
        raise StabilityError(
            f"{label} is unstable: arrival rate {arrival_rate!r} >= service rate {mu!r}"
            f" (utilization {arrival_rate / mu:.3f})"
        )


def utilization(arrival_rate: float, mu: float) -> float:
    """Offered load ``lam / mu`` of a single station."""
    if mu <= 0.0:
        raise ValueError(f"service rate must be positive, got {mu!r}")
    if arrival_rate < 0.0:
        raise ValueError(f"arrival rate must be non-negative, got {arrival_rate!r}")
    return arrival_rate / mu


def mm1_mean_sojourn(arrival_rate: float, mu: float) -> float:
    """Mean time in system of one M/M/1 station, ``1 / (mu - lam)``."""
    _check_rates(arrival_rate, mu, "station")
    return 1.0 / (mu - arrival_rate)


def mm1_sojourn_cdf(t: float, arrival_rate: float, mu: float) -> float:
    """P(sojourn <= t) at one M/M/1 station: exponential with rate mu - lam."""
    _check_rates(arrival_rate, mu, "station")
    if t < 0.0:
        raise ValueError(f"time must be non-negative, got {t!r}")
    return -math.expm1(-(mu - arrival_rate) * t)


def cascade_mean_sojourn(params: CascadeParams) -> float:
    """Mean end-to-end delay, ``1/(mu1 - lam) + 1/(mu2 - lam)``."""
    r1, r2 = params.net_rates()
    return 1.0 / r1 + 1.0 / r2


def cascade_sojourn_cdf(t: float, params: CascadeParams) -> float:
    """P(end-to-end delay <= t) for the two-station cascade."""
    if t < 0.0:
        raise ValueError(f"time must be non-negative, got {t!r}")
    r1, r2 = params.net_rates()
    if abs(r1 - r2) < EQUAL_RATE_REL_TOL * max(r1, r2):
        r = 0.5 * (r1 + r2)
        return 1.0 - (1.0 + r * t) * math.exp(-r * t)
    value = 1.0 - (r2 * math.exp(-r1 * t) - r1 * math.exp(-r2 * t)) / (r2 - r1)
    # Guard the corners where cancellation could nudge past the bounds.
    return min(1.0, max(0.0, value))


def cascade_quantile(q: float, params: CascadeParams) -> float:
    """Smallest t with ``cascade_sojourn_cdf(t) >= q``, for q in (0, 1).

    No closed-form inverse exists for distinct rates, so the root of
    ``F(t) - q`` is found by bracketed search on the monotone CDF.
    """
    if not 0.0 < q < 1.0:
        raise ValueError(f"quantile level must lie in (0, 1), got {q!r}")
    r1, r2 = params.net_rates()
    hi = 10.0 / min(r1, r2)
    while cascade_sojourn_cdf(hi, params) < q:
        hi *= 2.0
    return float(
        brentq(
            lambda t: cascade_sojourn_cdf(t, params) - q,
            0.0,
            hi,
            xtol=1e-15,
            rtol=1e-12,
        )
    )
