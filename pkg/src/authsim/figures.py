"""Figure rendering for sweep reports.

Two figure families, written as PNG next to the delimited output: mean
delay against arrival rate (one line per link latency, one figure per
service time) and box plots of the delay distribution along one curve.
Box geometry comes from precomputed :class:`~authsim.stats.SummaryStats`,
not raw samples, so figures match the CSV exactly.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg", force=False)
import matplotlib.pyplot as plt

from .experiments import PointResult, _group_by_curve, _tag

__all__ = ["render_mean_delay_figures", "render_boxplot_figures", "render_sweep_figures"]


def render_mean_delay_figures(out_stem, results: list[PointResult]) -> list[Path]:
    """One figure per service time: mean delay curves over arrival rate.

    Simulated means are solid with markers; the analytic cascade mean is
    the dashed companion in the same color.
    """
    out_stem = Path(out_stem)
    out_stem.parent.mkdir(parents=True, exist_ok=True)
    curves = _group_by_curve(results)
    by_service: dict[float, list[tuple[float, list[PointResult]]]] = {}
    for (link_ms, service_ms), points in sorted(curves.items()):
        by_service.setdefault(service_ms, []).append((link_ms, points))

    paths = []
    for service_ms, families in sorted(by_service.items()):
        fig, ax = plt.subplots(figsize=(7.0, 4.5))
        for link_ms, points in families:
            lams = [p.arrival_rate for p in points]
            means = [p.stats.mean for p in points]
            oracle = [p.oracle_mean for p in points]
            (line,) = ax.plot(
                lams, means, marker="o", markersize=4, label=f"link {link_ms:g} ms"
            )
            ax.plot(lams, oracle, linestyle="--", linewidth=1.0, color=line.get_color())
        ax.set_xlabel("authentication requests per second")
        ax.set_ylabel("mean delay (s)")
        ax.set_title(f"service time {service_ms:g} ms (dashed: analytic)")
        ax.grid(alpha=0.3)
        ax.legend()
        fig.tight_layout()
        path = out_stem.with_name(
            f"{out_stem.name}_mean_delay_service{_tag(service_ms)}ms.png"
        )
        fig.savefig(path, dpi=150)
        plt.close(fig)
        paths.append(path)
    return paths


def render_boxplot_figures(out_stem, results: list[PointResult]) -> list[Path]:
    """One figure per (link, service) pair: a box per arrival rate."""
    out_stem = Path(out_stem)
    out_stem.parent.mkdir(parents=True, exist_ok=True)
    paths = []
    for (link_ms, service_ms), points in sorted(_group_by_curve(results).items()):
        boxes = []
        for p in points:
            s = p.stats
            boxes.append(
                {
                    "label": f"{p.arrival_rate:g}",
                    "whislo": s.whisker_low,
                    "q1": s.q1,
                    "med": s.median,
                    "q3": s.q3,
                    "whishi": s.whisker_high,
                    "fliers": [],
                }
            )
        fig, ax = plt.subplots(figsize=(max(5.0, 0.5 * len(boxes) + 2.0), 4.5))
        ax.bxp(boxes, showfliers=False)
        ax.set_xlabel("authentication requests per second")
        ax.set_ylabel("delay (s)")
        ax.set_title(f"link {link_ms:g} ms, service {service_ms:g} ms")
        ax.grid(alpha=0.3, axis="y")
        fig.tight_layout()
        path = out_stem.with_name(
            f"{out_stem.name}_box_link{_tag(link_ms)}ms_service{_tag(service_ms)}ms.png"
        )
        fig.savefig(path, dpi=150)
        plt.close(fig)
        paths.append(path)
    return paths


def render_sweep_figures(out_stem, results: list[PointResult]) -> list[Path]:
    """All report figures for one sweep; returns the written paths."""
    if not results:
        return []
    return render_mean_delay_figures(out_stem, results) + render_boxplot_figures(
        out_stem, results
    )
