"""Delimited outputs and the figures rendered next to them.

Figures are written headlessly (Agg) so reports work in CI and over SSH.
matplotlib is imported lazily to keep non-reporting commands fast.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

from .bench import BenchRow, linear_fit
from .world import WorldState

BENCH_FIELDS = ("agents", "turns", "mean_ms", "p95_ms")


def write_bench_csv(rows: list[BenchRow], csv_path: str | Path) -> Path:
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=BENCH_FIELDS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row.to_dict())
    return csv_path


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def render_bench_figure(rows: list[BenchRow], png_path: str | Path) -> Path:
    """Overhead vs. roster size, with the least-squares line when it exists."""
    png_path = Path(png_path)
    png_path.parent.mkdir(parents=True, exist_ok=True)
    plt = _pyplot()
    xs = [row.agents for row in rows]
    means = [row.mean_ms for row in rows]
    p95s = [row.p95_ms for row in rows]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(xs, means, "o-", label="mean")
    ax.plot(xs, p95s, "s--", label="p95", alpha=0.7)
    if len(set(xs)) >= 2:
        slope, intercept, r_squared = linear_fit([float(x) for x in xs], means)
        fit_xs = [min(xs), max(xs)]
        ax.plot(
            fit_xs,
            [slope * x + intercept for x in fit_xs],
            ":",
            color="gray",
            label=f"fit: {slope * 1000:.1f} us/agent, R^2={r_squared:.3f}",
        )
    ax.set_xlabel("agents")
    ax.set_ylabel("per-turn coordination overhead (ms)")
    ax.set_title("Arbitration overhead vs. roster size")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    return png_path


def render_world_figure(world: WorldState, png_path: str | Path, title: str = "World") -> Path:
    """Top-down view: agents with heading arrows and view cones, the human,
    and labeled entities."""
    png_path = Path(png_path)
    png_path.parent.mkdir(parents=True, exist_ok=True)
    plt = _pyplot()
    from matplotlib.patches import Rectangle, Wedge

    fig, ax = plt.subplots(figsize=(6.0, 6.0))
    b = world.bounds
    ax.add_patch(
        Rectangle((b.min_x, b.min_y), b.max_x - b.min_x, b.max_y - b.min_y, fill=False, color="black")
    )
    for agent_id, body in sorted(world.agents.items()):
        x, y = body.pose.x, body.pose.y
        boresight = body.pose.heading_deg + body.head.pan_deg
        ax.add_patch(
            Wedge(
                (x, y),
                world.fov_range_m,
                boresight - world.fov_half_angle_deg,
                boresight + world.fov_half_angle_deg,
                color="tab:blue",
                alpha=0.12,
            )
        )
        ax.plot([x], [y], "^", color="tab:blue", markersize=10)
        rad = math.radians(body.pose.heading_deg)
        ax.annotate(
            "",
            xy=(x + 0.6 * math.cos(rad), y + 0.6 * math.sin(rad)),
            xytext=(x, y),
            arrowprops={"arrowstyle": "->", "color": "tab:blue"},
        )
        ax.annotate(agent_id, (x, y), textcoords="offset points", xytext=(6, 6))
    ax.plot([world.human.x], [world.human.y], "*", color="tab:red", markersize=14)
    ax.annotate("human", (world.human.x, world.human.y), textcoords="offset points", xytext=(6, 6))
    for entity in world.entities:
        ax.plot([entity.position.x], [entity.position.y], "o", color="tab:green", markersize=6)
        ax.annotate(entity.label, (entity.position.x, entity.position.y), textcoords="offset points", xytext=(6, -10), fontsize=8)
    margin = 0.5
    ax.set_xlim(b.min_x - margin, b.max_x + margin)
    ax.set_ylim(b.min_y - margin, b.max_y + margin)
    ax.set_aspect("equal")
    ax.set_title(f"{title} (t={world.clock_ms} ms)")
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    fig.tight_layout()
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    return png_path
