"""Scenario and sweep execution with oracle comparison and CSV output.

A *point* is one (arrival rate, link latency, service time) triple run for
the configured number of replications.  Its pooled delays are summarized,
the replication means give a confidence interval, and the closed-form
cascade mean is attached for validation.  A *sweep* is the Cartesian
product of parameter lists; each point gets a seed derived from the base
seed and its position, so any point can be reproduced in isolation.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, asdict
from pathlib import Path
from typing import Callable, Iterator, Optional

import numpy as np

from .kernel import derive_seed
from .oracle import CascadeParams, StabilityError, cascade_mean_sojourn
from .queueing import ScenarioConfig, run_replications, validate_config
from .stats import (
    ReplicationCI,
    SummaryStats,
    format_float,
    replication_ci,
    stats_csv_values,
    summarize,
)

__all__ = [
    "CSV_HEADER",
    "SweepSpec",
    "PointResult",
    "run_point",
    "iter_grid",
    "run_sweep",
    "csv_row",
    "write_results_csv",
    "append_results_csv",
    "write_curve_files",
    "write_boxplot_files",
    "write_sweep_meta",
]

log = logging.getLogger(__name__)

CSV_HEADER = (
    "lambda,link_ms,service_ms,count,mean,stddev,min,q1,median,q3,"
    "whisker_low,whisker_high,outliers,max,oracle_mean,rel_err,ci_contains_oracle"
)


@dataclass(frozen=True)
class SweepSpec:
    """Grid of scenarios: every combination of the three parameter lists.

    Latencies and service times are in milliseconds here because that is
    how sweep ranges are naturally written; they are converted to seconds
    when scenarios are built.
    """

    lambda_values: tuple[float, ...]
    link_ms_values: tuple[float, ...]
    service_ms_values: tuple[float, ...]
    duration: float = 600.0
    warmup: Optional[float] = None
    replications: int = 20
    base_seed: int = 1
    service_distribution: str = "exponential"
    allow_unstable: bool = False


@dataclass(frozen=True)
class PointResult:
    """Summary of one grid point with its analytic reference."""

    arrival_rate: float
    link_ms: float
    service_ms: float
    stats: SummaryStats
    ci: Optional[ReplicationCI]
    oracle_mean: float
    rel_err: float
    ci_contains_oracle: Optional[bool]
    generated: int
    completed: int
    in_system: int


def run_point(cfg: ScenarioConfig, engine: str = "event") -> PointResult:
    """Run all replications of one scenario and compare with the oracle.

    Delays are pooled across replications for the box statistics; the
    confidence interval is over per-replication means (None when only one
    replication ran).
    """
    reps = run_replications(cfg, engine=engine)
    non_empty = [r.values for r in reps if r.values.size > 0]
    if not non_empty:
        raise ValueError(
            "no replication produced post-warm-up samples; "
            "lengthen the run or lower the warm-up"
        )
    pooled = np.concatenate(non_empty)
    stats = summarize(pooled)
    rep_means = [float(v.mean()) for v in non_empty]
    ci = replication_ci(rep_means) if len(rep_means) >= 2 else None

    params = CascadeParams.from_service_times(
        cfg.arrival_rate, cfg.link_latency, cfg.auth_service_time
    )
    try:
        oracle_mean = cascade_mean_sojourn(params) + cfg.added_latency
        rel_err = abs(stats.mean - oracle_mean) / oracle_mean
    except StabilityError:
        # Simulating past saturation is allowed; the steady-state formula
        # has nothing to say there.
        oracle_mean = math.nan
        rel_err = math.nan
    return PointResult(
        arrival_rate=cfg.arrival_rate,
        link_ms=cfg.link_latency * 1e3,
        service_ms=cfg.auth_service_time * 1e3,
        stats=stats,
        ci=ci,
        oracle_mean=oracle_mean,
        rel_err=rel_err,
        ci_contains_oracle=(
            ci.contains(oracle_mean)
            if ci is not None and math.isfinite(oracle_mean)
            else None
        ),
        generated=sum(r.generated for r in reps),
        completed=sum(r.completed for r in reps),
        in_system=sum(r.in_system for r in reps),
    )


def iter_grid(spec: SweepSpec) -> Iterator[tuple[int, ScenarioConfig]]:
    """(point index, scenario) pairs in deterministic grid order.

    Arrival rate varies fastest, then service time, then link latency, so
    consecutive points trace one mean-delay curve.  Point seeds depend only
    on the base seed and the index.
    """
    idx = 0
    for link_ms in spec.link_ms_values:
        for service_ms in spec.service_ms_values:
            for lam in spec.lambda_values:
                yield idx, ScenarioConfig(
                    arrival_rate=lam,
                    link_latency=link_ms * 1e-3,
                    auth_service_time=service_ms * 1e-3,
                    duration=spec.duration,
                    warmup=spec.warmup,
                    seed=derive_seed(spec.base_seed, "point", idx),
                    replications=spec.replications,
                    service_distribution=spec.service_distribution,
                    allow_unstable=spec.allow_unstable,
                )
                idx += 1


def run_sweep(
    spec: SweepSpec,
    engine: str = "event",
    on_point: Optional[Callable[[PointResult], None]] = None,
) -> list[PointResult]:
    """Run the whole grid, skipping unstable points with a logged warning.

    ``on_point`` is called after each finished point (for progress output
    or incremental writes).
    """
    results: list[PointResult] = []
    for _idx, cfg in iter_grid(spec):
        try:
            validate_config(cfg)
        except StabilityError as exc:
            log.warning(
                "skipping unstable point lambda=%g/s link=%gms service=%gms: %s",
                cfg.arrival_rate,
                cfg.link_latency * 1e3,
                cfg.auth_service_time * 1e3,
                exc,
            )
            continue
        result = run_point(cfg, engine=engine)
        results.append(result)
        if on_point is not None:
            on_point(result)
    return results


def csv_row(result: PointResult) -> str:
    """One line matching :data:`CSV_HEADER`; no trailing newline."""
    if result.ci_contains_oracle is None:
        contains = ""
    else:
        contains = "true" if result.ci_contains_oracle else "false"
    cells = [
        format_float(result.arrival_rate),
        format_float(result.link_ms),
        format_float(result.service_ms),
        *stats_csv_values(result.stats),
        format_float(result.oracle_mean),
        format_float(result.rel_err),
        contains,
    ]
    return ",".join(cells)


def write_results_csv(path, results: list[PointResult]) -> Path:
    """Write header plus one row per point; rewrites the file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        for result in results:
            fh.write(csv_row(result) + "\n")
    return path


def append_results_csv(path, results: list[PointResult]) -> Path:
    """Append rows, writing the header first when the file is new or empty."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fresh = not path.exists() or path.stat().st_size == 0
    with open(path, "a", newline="") as fh:
        if fresh:
            fh.write(CSV_HEADER + "\n")
        for result in results:
            fh.write(csv_row(result) + "\n")
    return path


def _group_by_curve(
    results: list[PointResult],
) -> dict[tuple[float, float], list[PointResult]]:
    groups: dict[tuple[float, float], list[PointResult]] = {}
    for r in results:
        groups.setdefault((r.link_ms, r.service_ms), []).append(r)
    for points in groups.values():
        points.sort(key=lambda r: r.arrival_rate)
    return groups


def _tag(value_ms: float) -> str:
    # 2 -> "2", 2.5 -> "2p5"; keeps filenames free of dots.
    return f"{value_ms:g}".replace(".", "p").replace("-", "m")


def write_curve_files(out_stem, results: list[PointResult]) -> list[Path]:
    """Per (link, service) pair, a small CSV of mean delay against arrival rate."""
    out_stem = Path(out_stem)
    out_stem.parent.mkdir(parents=True, exist_ok=True)
    paths = []
    for (link_ms, service_ms), points in sorted(_group_by_curve(results).items()):
        path = out_stem.with_name(
            f"{out_stem.name}_curve_link{_tag(link_ms)}ms_service{_tag(service_ms)}ms.csv"
        )
        with open(path, "w", newline="") as fh:
            fh.write("lambda,mean,oracle_mean\n")
            for r in points:
                fh.write(
                    f"{format_float(r.arrival_rate)},{format_float(r.stats.mean)},"
                    f"{format_float(r.oracle_mean)}\n"
                )
        paths.append(path)
    return paths


def write_boxplot_files(out_stem, results: list[PointResult]) -> list[Path]:
    """Per (link, service) pair, the box geometry for each arrival rate."""
    out_stem = Path(out_stem)
    out_stem.parent.mkdir(parents=True, exist_ok=True)
    paths = []
    header = "lambda,min,whisker_low,q1,median,q3,whisker_high,max,outliers\n"
    for (link_ms, service_ms), points in sorted(_group_by_curve(results).items()):
        path = out_stem.with_name(
            f"{out_stem.name}_box_link{_tag(link_ms)}ms_service{_tag(service_ms)}ms.csv"
        )
        with open(path, "w", newline="") as fh:
            fh.write(header)
            for r in points:
                s = r.stats
                cells = [
                    format_float(r.arrival_rate),
                    format_float(s.min),
                    format_float(s.whisker_low),
                    format_float(s.q1),
                    format_float(s.median),
                    format_float(s.q3),
                    format_float(s.whisker_high),
                    format_float(s.max),
                    str(s.outlier_count),
                ]
                fh.write(",".join(cells) + "\n")
        paths.append(path)
    return paths


def write_sweep_meta(out_stem, spec: SweepSpec, engine: str, n_points: int) -> Path:
    """Sidecar JSON recording how the sweep was produced."""
    out_stem = Path(out_stem)
    out_stem.parent.mkdir(parents=True, exist_ok=True)
    path = out_stem.with_name(f"{out_stem.name}_meta.json")
    payload = {
        "spec": asdict(spec),
        "engine": engine,
        "points_written": n_points,
    }
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path
