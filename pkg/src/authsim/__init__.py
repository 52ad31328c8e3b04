"""Simulation toolkit for an authentication service reached over a mobile link.

The service is modeled as two single-server FIFO queues in series (the link,
then the authentication server) under Poisson arrivals.  The package pairs
the simulator with the closed-form results for that system so every run can
be checked against an independent analytic answer, and with an executable
model of the multiparty session-approval protocol whose performance the
queueing model represents.
"""

from .kernel import Event, EventSchedule, PastEventError, RngStream, derive_seed
from .oracle import (
    CascadeParams,
    StabilityError,
    cascade_mean_sojourn,
    cascade_quantile,
    cascade_sojourn_cdf,
    mm1_mean_sojourn,
    mm1_sojourn_cdf,
    utilization,
)
from .queueing import (
    DelaySamples,
    Request,
    ScenarioConfig,
    Station,
    TandemNetwork,
    build_network,
    run_replications,
    run_scenario,
    transmission_time,
    validate_config,
)
from .stats import (
    EmptySampleError,
    ReplicationCI,
    SummaryStats,
    replication_ci,
    summarize,
)
from .experiments import (
    CSV_HEADER,
    PointResult,
    SweepSpec,
    run_point,
    run_sweep,
    write_results_csv,
)
from .protocol import (
    CloudRegistry,
    Credential,
    ProtocolTranscript,
    SessionAuthority,
    SessionHandler,
    SessionStatus,
    UserAgent,
    run_protocol,
)

__version__ = "0.1.0"

__all__ = [
    "Event",
    "EventSchedule",
    "PastEventError",
    "RngStream",
    "derive_seed",
    "CascadeParams",
    "StabilityError",
    "cascade_mean_sojourn",
    "cascade_quantile",
    "cascade_sojourn_cdf",
    "mm1_mean_sojourn",
    "mm1_sojourn_cdf",
    "utilization",
    "DelaySamples",
    "Request",
    "ScenarioConfig",
    "Station",
    "TandemNetwork",
    "build_network",
    "run_replications",
    "run_scenario",
    "transmission_time",
    "validate_config",
    "EmptySampleError",
    "ReplicationCI",
    "SummaryStats",
    "replication_ci",
    "summarize",
    "CSV_HEADER",
    "PointResult",
    "SweepSpec",
    "run_point",
    "run_sweep",
    "write_results_csv",
    "CloudRegistry",
    "Credential",
    "ProtocolTranscript",
    "SessionAuthority",
    "SessionHandler",
    "SessionStatus",
    "UserAgent",
    "run_protocol",
    "__version__",
]
