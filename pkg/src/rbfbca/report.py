"""Rendering: SVG placement maps and the campaign summary figure.

The SVG is assembled by hand so its structure stays predictable: one
`rect.obstacle` per obstacle and one `path.fov-wedge` plus one `circle.camera`
per camera, with all coordinates written at fixed precision.  The campaign
figure goes through matplotlib's Agg backend and lands next to the CSVs.
"""

from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .campaign import CampaignReport
    from .coverage import CoverageScene

PIXELS_PER_METER = 60.0
WEDGE_ARC_POINTS = 48

_STYLE = """
  .scene { fill: #fbfaf7; stroke: #444; stroke-width: 2; }
  .grid { stroke: #ddd; stroke-width: 1; }
  .obstacle { fill: #8d99ae; stroke: #5c677d; stroke-width: 1.5; }
  .fov-wedge { fill: #ffb703; fill-opacity: 0.22; stroke: #fb8500; stroke-width: 1; }
  .heading { stroke: #d62828; stroke-width: 2; }
  .camera { fill: #d62828; stroke: #7f1d1d; stroke-width: 1; }
  .caption { font: 14px sans-serif; fill: #222; }
"""


def _fmt(v: float) -> str:
    return f"{v:.2f}"


class _Frame:
    """Meters to pixels with the y axis flipped to SVG orientation."""

    def __init__(self, width_m: float, height_m: float, margin: float = 20.0):
        self.scale = PIXELS_PER_METER
        self.margin = margin
        self.height_m = height_m
        self.width_px = width_m * self.scale + 2 * margin
        self.height_px = height_m * self.scale + 2 * margin

    def to_px(self, x: float, y: float) -> tuple[float, float]:
        return (
            self.margin + x * self.scale,
            self.margin + (self.height_m - y) * self.scale,
        )


def _wedge_path(frame: _Frame, pos: np.ndarray, heading: float, half_angle: float, radius: float) -> str:
    angles = np.linspace(heading - half_angle, heading + half_angle, WEDGE_ARC_POINTS)
    cx, cy = frame.to_px(pos[0], pos[1])
    parts = [f"M {_fmt(cx)} {_fmt(cy)}"]
    for a in angles:
        px, py = frame.to_px(pos[0] + radius * np.cos(a), pos[1] + radius * np.sin(a))
        parts.append(f"L {_fmt(px)} {_fmt(py)}")
    parts.append("Z")
    return " ".join(parts)


def placement_svg(scene: "CoverageScene", placement: np.ndarray, coverage: float | None = None) -> str:
    """SVG document for a camera constellation over a scene."""
    placement = np.asarray(placement, dtype=float)
    if placement.shape != (3 * scene.camera_count,):
        raise ValueError(
            f"placement must have shape ({3 * scene.camera_count},), got {placement.shape}"
        )
    frame = _Frame(scene.width, scene.height)
    radius = min(scene.camera_model.sight_range, float(np.hypot(scene.width, scene.height)))
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_fmt(frame.width_px)}" height="{_fmt(frame.height_px)}" '
        f'viewBox="0 0 {_fmt(frame.width_px)} {_fmt(frame.height_px)}">',
        f"<style>{_STYLE}</style>",
    ]
    x0, y0 = frame.to_px(0.0, scene.height)
    lines.append(
        f'<rect class="scene" x="{_fmt(x0)}" y="{_fmt(y0)}" '
        f'width="{_fmt(scene.width * frame.scale)}" height="{_fmt(scene.height * frame.scale)}"/>'
    )
    step = 1.0 / scene.grid_resolution
    k = 1
    while k * step < scene.width - 1e-9:
        gx, gy = frame.to_px(k * step, scene.height)
        lines.append(
            f'<line class="grid" x1="{_fmt(gx)}" y1="{_fmt(gy)}" '
            f'x2="{_fmt(gx)}" y2="{_fmt(gy + scene.height * frame.scale)}"/>'
        )
        k += 1
    k = 1
    while k * step < scene.height - 1e-9:
        gx, gy = frame.to_px(0.0, k * step)
        lines.append(
            f'<line class="grid" x1="{_fmt(gx)}" y1="{_fmt(gy)}" '
            f'x2="{_fmt(gx + scene.width * frame.scale)}" y2="{_fmt(gy)}"/>'
        )
        k += 1
    for obstacle in scene.obstacles:
        ox, oy = frame.to_px(obstacle.x_min, obstacle.y_max)
        lines.append(
            f'<rect class="obstacle" x="{_fmt(ox)}" y="{_fmt(oy)}" '
            f'width="{_fmt((obstacle.x_max - obstacle.x_min) * frame.scale)}" '
            f'height="{_fmt((obstacle.y_max - obstacle.y_min) * frame.scale)}"/>'
        )
    for m in range(scene.camera_count):
        pos = placement[3 * m : 3 * m + 2]
        heading = float(placement[3 * m + 2])
        lines.append(
            f'<path class="fov-wedge" '
            f'd="{_wedge_path(frame, pos, heading, scene.camera_model.fov_half_angle, radius)}"/>'
        )
        cx, cy = frame.to_px(pos[0], pos[1])
        hx, hy = frame.to_px(
            pos[0] + 0.6 * np.cos(heading), pos[1] + 0.6 * np.sin(heading)
        )
        lines.append(
            f'<line class="heading" x1="{_fmt(cx)}" y1="{_fmt(cy)}" '
            f'x2="{_fmt(hx)}" y2="{_fmt(hy)}"/>'
        )
        lines.append(f'<circle class="camera" cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="5"/>')
    if coverage is not None:
        lines.append(
            f'<text class="caption" x="{_fmt(frame.margin)}" '
            f'y="{_fmt(frame.height_px - 5.0)}">coverage {100.0 * coverage:.1f}%</text>'
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def write_placement_svg(
    scene: "CoverageScene",
    placement: np.ndarray,
    path: "str | Path",
    coverage: float | None = None,
) -> Path:
    path = Path(path)
    path.write_text(placement_svg(scene, placement, coverage), encoding="utf-8")
    return path


def write_campaign_figure(report: "CampaignReport", path: "str | Path") -> Path:
    """Min/mean/max whisker chart per mode group, written as a PNG."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    groups = report.groups
    have_deviation = all(g.stats["deviation_mean"] is not None for g in groups)
    metric = "deviation" if have_deviation else "best_value"
    labels = [g.mode for g in groups]
    xs = np.arange(len(groups))

    fig, (ax_val, ax_evals) = plt.subplots(2, 1, figsize=(6.5, 6.0), sharex=True)
    for ax, name, title in (
        (ax_val, metric, metric.replace("_", " ")),
        (ax_evals, "evals", "objective evaluations"),
    ):
        lo = np.array([g.stats[f"{name}_min"] for g in groups], dtype=float)
        mean = np.array([g.stats[f"{name}_mean"] for g in groups], dtype=float)
        hi = np.array([g.stats[f"{name}_max"] for g in groups], dtype=float)
        ax.vlines(xs, lo, hi, color="#457b9d", linewidth=2)
        ax.plot(xs, mean, "o", color="#e63946", markersize=6)
        ax.set_ylabel(title)
        ax.grid(True, axis="y", alpha=0.3)
    ax_evals.set_xticks(xs)
    ax_evals.set_xticklabels(labels, rotation=20)
    runs = groups[0].runs if groups else 0
    fig.suptitle(f"{report.config.objective} campaign, {runs} runs per mode")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
