"""Two-stage tandem queue fed by Poisson traffic.

Stage 1 models the mobile-link latency, stage 2 the authentication server.
Each request passes through both single-server FIFO stations with unbounded
buffers; its delay is the time from arrival to stage-2 departure.

Two engines produce delays from the same seed:

* ``event``: the event-driven network built on :mod:`authsim.kernel`.  The
  canonical engine; every structural invariant (FIFO order, conservation,
  per-request timestamps) is observable here.
* ``recurrence``: a vectorized form of the same system.  A request enters
  service when both it and the server are free, so each stage departure is
  ``max(stage arrival, previous departure) + service draw``.  It consumes
  the identical per-stream random numbers in the identical order, and exists
  because large parameter sweeps are impractical one event at a time.
"""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .kernel import EventSchedule, RngStream, derive_seed
from .oracle import StabilityError

__all__ = [
    "SERVICE_DISTRIBUTIONS",
    "ENGINES",
    "ScenarioConfig",
    "Request",
    "Station",
    "TandemNetwork",
    "DelaySamples",
    "validate_config",
    "build_network",
    "run_scenario",
    "run_replications",
    "transmission_time",
]

SERVICE_DISTRIBUTIONS = ("exponential", "deterministic")
ENGINES = ("event", "recurrence")


@dataclass(frozen=True)
class ScenarioConfig:
    """One simulated scenario.

    Times are in seconds, rates in requests per second.  ``warmup`` of None
    means one tenth of ``duration``; samples from requests created during
    warm-up are discarded.  ``added_latency`` is a constant added to every
    delay sample (for example a fixed transmission time); it does not touch
    the queueing dynamics.  ``allow_unstable`` permits scenarios whose
    utilization is at or above 1 at either station, for which no steady
    state exists.
    """

    arrival_rate: float
    link_latency: float
    auth_service_time: float
    duration: float = 600.0
    warmup: Optional[float] = None
    seed: int = 1
    replications: int = 20
    service_distribution: str = "exponential"
    added_latency: float = 0.0
    allow_unstable: bool = False

    @property
    def warmup_time(self) -> float:
        return 0.1 * self.duration if self.warmup is None else self.warmup


def validate_config(cfg: ScenarioConfig) -> None:
    """Raise ValueError or StabilityError for an unusable scenario."""
    if cfg.arrival_rate <= 0.0:
        raise ValueError(f"arrival rate must be positive, got {cfg.arrival_rate!r}")
    if cfg.link_latency <= 0.0:
        raise ValueError(f"link latency must be positive, got {cfg.link_latency!r}")
    if cfg.auth_service_time <= 0.0:
        raise ValueError(
            f"auth service time must be positive, got {cfg.auth_service_time!r}"
        )
    if cfg.duration <= 0.0:
        raise ValueError(f"duration must be positive, got {cfg.duration!r}")
    if not 0.0 <= cfg.warmup_time < cfg.duration:
        raise ValueError(
            f"warm-up {cfg.warmup_time!r} must lie in [0, duration={cfg.duration!r})"
        )
    if cfg.replications < 1:
        raise ValueError(f"replications must be >= 1, got {cfg.replications!r}")
    if cfg.service_distribution not in SERVICE_DISTRIBUTIONS:
        raise ValueError(
            f"unknown service distribution {cfg.service_distribution!r}; "
            f"expected one of {SERVICE_DISTRIBUTIONS}"
        )
    if cfg.added_latency < 0.0:
        raise ValueError(f"added latency must be non-negative, got {cfg.added_latency!r}")
    if not cfg.allow_unstable:
        for label, mean_service in (
            ("link", cfg.link_latency),
            ("auth", cfg.auth_service_time),
        ):
            rho = cfg.arrival_rate * mean_service
            if rho >= 1.0:
                raise StabilityError(
                    f"{label} station is unstable at arrival rate "
                    f"{cfg.arrival_rate!r}/s (utilization {rho:.3f} >= 1); "
                    f"pass allow_unstable to simulate anyway"
                )


class Request:
    """One authentication attempt, stamped at each stage boundary."""

    __slots__ = (
        "id",
        "created_at",
        "stage1_enter",
        "stage1_exit",
        "stage2_enter",
        "stage2_exit",
    )

    def __init__(self, rid: int, created_at: float) -> None:
        self.id = rid
        self.created_at = created_at
        self.stage1_enter: Optional[float] = None
        self.stage1_exit: Optional[float] = None
        self.stage2_enter: Optional[float] = None
        self.stage2_exit: Optional[float] = None

    @property
    def total_delay(self) -> float:
        """Arrival-to-completion time; valid once the request has left stage 2."""
        if self.stage2_exit is None:
            raise ValueError(f"request {self.id} has not completed stage 2")
        return self.stage2_exit - self.created_at

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Request(id={self.id}, created_at={self.created_at!r})"


class Station:
    """Single-server FIFO stage with exponential or fixed service times."""

    __slots__ = (
        "name",
        "mean_service_time",
        "deterministic",
        "busy",
        "_rng",
        "_sched",
        "_downstream",
        "_enter_field",
        "_exit_field",
        "_waiting",
        "_in_service",
    )

    def __init__(
        self,
        name: str,
        mean_service_time: float,
        rng: RngStream,
        sched: EventSchedule,
        downstream: Callable[[Request], None],
        enter_field: str,
        exit_field: str,
        deterministic: bool = False,
    ) -> None:
        self.name = name
        self.mean_service_time = mean_service_time
        self.deterministic = deterministic
        self.busy = False
        self._rng = rng
        self._sched = sched
        self._downstream = downstream
        self._enter_field = enter_field
        self._exit_field = exit_field
        self._waiting: deque[Request] = deque()
        self._in_service: Optional[Request] = None

    @property
    def queue_length(self) -> int:
        """Requests waiting, excluding the one in service."""
        return len(self._waiting)

    @property
    def in_system(self) -> int:
        return len(self._waiting) + (1 if self.busy else 0)

    def arrive(self, req: Request) -> None:
        setattr(req, self._enter_field, self._sched.now)
        if self.busy:
            self._waiting.append(req)
        else:
            self.busy = True
            self._begin_service(req)

    def _begin_service(self, req: Request) -> None:
        self._in_service = req
        if self.deterministic:
            service = self.mean_service_time
        else:
            service = self._rng.exponential(self.mean_service_time)
        self._sched.schedule(self._sched.now + service, self._complete)

    def _complete(self) -> None:
        req = self._in_service
        setattr(req, self._exit_field, self._sched.now)
        if self._waiting:
            self._begin_service(self._waiting.popleft())
        else:
            self.busy = False
            self._in_service = None
        self._downstream(req)


class DelaySamples:
    """Delays measured after warm-up, plus run accounting.

    ``values`` holds one delay per completed post-warm-up request in
    completion order.  ``generated``, ``completed`` and ``in_system`` count
    all requests regardless of warm-up; generated == completed + in_system
    always.  ``requests`` carries completed Request objects when the event
    engine was asked to keep them, else None.
    """

    __slots__ = ("values", "scenario", "generated", "completed", "in_system", "requests")

    def __init__(
        self,
        values: np.ndarray,
        scenario: ScenarioConfig,
        generated: int,
        completed: int,
        in_system: int,
        requests: Optional[list[Request]] = None,
    ) -> None:
        self.values = values
        self.scenario = scenario
        self.generated = generated
        self.completed = completed
        self.in_system = in_system
        self.requests = requests


class TandemNetwork:
    """Poisson source -> link station -> auth station -> sink."""

    def __init__(self, cfg: ScenarioConfig, keep_requests: bool = False) -> None:
        validate_config(cfg)
        self.cfg = cfg
        self.sched = EventSchedule()
        self._arrival_rng = RngStream(derive_seed(cfg.seed, "arrivals"))
        deterministic = cfg.service_distribution == "deterministic"
        self.auth_station = Station(
            "auth",
            cfg.auth_service_time,
            RngStream(derive_seed(cfg.seed, "service-auth")),
            self.sched,
            self._absorb,
            "stage2_enter",
            "stage2_exit",
            deterministic,
        )
        self.link_station = Station(
            "link",
            cfg.link_latency,
            RngStream(derive_seed(cfg.seed, "service-link")),
            self.sched,
            self.auth_station.arrive,
            "stage1_enter",
            "stage1_exit",
            deterministic,
        )
        self.generated = 0
        self.completed = 0
        self._next_id = 0
        self._mean_interarrival = 1.0 / cfg.arrival_rate
        self._warmup = cfg.warmup_time
        self._delays: list[float] = []
        self._keep_requests = keep_requests
        self.completed_requests: list[Request] = []
        self._started = False

    @property
    def in_system(self) -> int:
        return self.link_station.in_system + self.auth_station.in_system

    def start(self) -> None:
        """Schedule the first Poisson arrival.  Idempotent."""
        if self._started:
            return
        self._started = True
        first = self._arrival_rng.exponential(self._mean_interarrival)
        self.sched.schedule(first, self._arrive)

    def _arrive(self) -> None:
        now = self.sched.now
        # Draw the next interarrival before touching the stations so the
        # arrival stream stays a pure function of its own RNG.
        self.sched.schedule(
            now + self._arrival_rng.exponential(self._mean_interarrival), self._arrive
        )
        self.generated += 1
        req = Request(self._next_id, now)
        self._next_id += 1
        self.link_station.arrive(req)

    def inject_request(self, at_time: float) -> Request:
        """Feed one request at an exact time, outside the Poisson source.

        Useful for probing an idle network, where the delay must be exactly
        the sum of the two service draws.
        """
        req = Request(self._next_id, at_time)
        self._next_id += 1

        def deliver() -> None:
            self.generated += 1
            self.link_station.arrive(req)

        self.sched.schedule(at_time, deliver)
        return req

    def _absorb(self, req: Request) -> None:
        self.completed += 1
        if req.created_at >= self._warmup:
            self._delays.append(req.stage2_exit - req.created_at + self.cfg.added_latency)
        if self._keep_requests:
            self.completed_requests.append(req)

    def run(self) -> DelaySamples:
        """Drive the network to the configured horizon and collect samples."""
        self.start()
        self.sched.run_until(self.cfg.duration)
        values = np.asarray(self._delays, dtype=float)
        if values.size == 0:
            warnings.warn(
                "scenario completed no requests after warm-up; "
                "summary statistics will be unavailable",
                RuntimeWarning,
                stacklevel=2,
            )
        return DelaySamples(
            values=values,
            scenario=self.cfg,
            generated=self.generated,
            completed=self.completed,
            in_system=self.in_system,
            requests=self.completed_requests if self._keep_requests else None,
        )


def build_network(cfg: ScenarioConfig, keep_requests: bool = False) -> TandemNetwork:
    """Validated network with no events executed yet."""
    return TandemNetwork(cfg, keep_requests=keep_requests)


def _run_recurrence(cfg: ScenarioConfig) -> DelaySamples:
    arrival_rng = RngStream(derive_seed(cfg.seed, "arrivals"))
    mean_ia = 1.0 / cfg.arrival_rate

    # Draw interarrivals in chunks until the horizon is covered.
    chunks: list[np.ndarray] = []
    total = 0.0
    hint = max(int(cfg.duration * cfg.arrival_rate * 1.05) + 64, 256)
    while total <= cfg.duration:
        chunk = arrival_rng.exponential_array(mean_ia, hint)
        chunks.append(chunk)
        total += float(chunk.sum())
        hint = max(hint // 4, 256)
    arrivals = np.cumsum(np.concatenate(chunks))
    arrivals = arrivals[arrivals <= cfg.duration]
    n = arrivals.size
    if n == 0:
        warnings.warn(
            "scenario completed no requests after warm-up; "
            "summary statistics will be unavailable",
            RuntimeWarning,
            stacklevel=3,
        )
        return DelaySamples(
            values=np.empty(0, dtype=float),
            scenario=cfg,
            generated=0,
            completed=0,
            in_system=0,
        )

    def draws(label: str, mean: float) -> np.ndarray:
        if cfg.service_distribution == "deterministic":
            return np.full(n, mean)
        return RngStream(derive_seed(cfg.seed, label)).exponential_array(mean, n)

    s1 = draws("service-link", cfg.link_latency)
    s2 = draws("service-auth", cfg.auth_service_time)

    # Stage departure d_i = max(stage arrival_i, d_{i-1}) + s_i, unrolled:
    # d_i = cumsum(s)_i + running_max(arrival_j - cumsum(s)_{j-1}).
    cs1 = np.cumsum(s1)
    d1 = cs1 + np.maximum.accumulate(arrivals - (cs1 - s1))
    cs2 = np.cumsum(s2)
    d2 = cs2 + np.maximum.accumulate(d1 - (cs2 - s2))

    done = d2 <= cfg.duration
    kept = done & (arrivals >= cfg.warmup_time)
    completed = int(np.count_nonzero(done))
    values = d2[kept] - arrivals[kept] + cfg.added_latency
    if values.size == 0:
        warnings.warn(
            "scenario completed no requests after warm-up; "
            "summary statistics will be unavailable",
            RuntimeWarning,
            stacklevel=3,
        )
    return DelaySamples(
        values=values,
        scenario=cfg,
        generated=n,
        completed=completed,
        in_system=n - completed,
    )


def run_scenario(
    cfg: ScenarioConfig, engine: str = "event", keep_requests: bool = False
) -> DelaySamples:
    """Run one scenario with one seed and return its delay samples.

    ``engine`` selects the event-driven network or the vectorized
    recurrence; both yield the same delays for the same config up to
    floating-point association. ``keep_requests`` applies to the event
    engine only.
    """
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}; expected one of {ENGINES}")
    if engine == "event":
        return build_network(cfg, keep_requests=keep_requests).run()
    validate_config(cfg)
    return _run_recurrence(cfg)


def run_replications(cfg: ScenarioConfig, engine: str = "event") -> list[DelaySamples]:
    """Independent replications of ``cfg``.

    Replication ``i`` runs with seed ``derive_seed(cfg.seed, "rep", i)``, so
    the set is reproducible from the scenario seed alone and no replication
    shares a stream with another.
    """
    validate_config(cfg)
    out = []
    for i in range(cfg.replications):
        rep_cfg = replace(cfg, seed=derive_seed(cfg.seed, "rep", i))
        out.append(run_scenario(rep_cfg, engine=engine))
    return out


def transmission_time(packet_bits: float, data_rate_bits_per_s: float) -> float:
    """Serialization delay of one packet on a link of the given data rate.

    A sanity check for deciding whether fixed transmission time matters
    next to queueing delay; it is never added to the model implicitly.
    """
    if packet_bits <= 0.0:
        raise ValueError(f"packet size must be positive, got {packet_bits!r}")
    if data_rate_bits_per_s <= 0.0:
        raise ValueError(f"data rate must be positive, got {data_rate_bits_per_s!r}")
    return packet_bits / data_rate_bits_per_s
