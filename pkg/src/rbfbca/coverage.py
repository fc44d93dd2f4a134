"""Desk-scale 2D camera coverage: a rectangular scene with axis-aligned
obstacles, a uniform cell grid, and sector-of-a-disk camera fields of view.

A free cell center is visible from a camera when it lies within range, within
the field-of-view half-angle of the heading, and the sight segment touches no
obstacle (grazing the boundary counts as blocked).  A camera placed inside an
obstacle sees nothing.  Per-camera blocks are (x, y, heading).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .domain import BlockStructure, BoxDomain
from .objectives import DecomposedObjective
from .surrogate import full_symmetric_group

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Obstacle:
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self) -> None:
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError("obstacle must have positive extent")

    def contains(self, x: float, y: float) -> bool:
        """Closed-rectangle containment; boundary counts as inside."""
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max


@dataclass(frozen=True)
class CameraModel:
    fov_half_angle: float
    sight_range: float

    def __post_init__(self) -> None:
        if not 0.0 < self.fov_half_angle <= np.pi:
            raise ValueError("fov_half_angle must lie in (0, pi]")
        if self.sight_range <= 0.0:
            raise ValueError("sight_range must be positive")


@dataclass(frozen=True)
class CoverageScene:
    width: float
    height: float
    grid_resolution: float          # cells per meter; must tile the scene exactly
    obstacles: tuple[Obstacle, ...]
    camera_model: CameraModel
    camera_count: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        if self.width <= 0 or self.height <= 0:
            raise ValueError("scene extent must be positive")
        if self.grid_resolution <= 0:
            raise ValueError("grid_resolution must be positive")
        if self.camera_count < 1:
            raise ValueError("at least one camera is required")
        for axis, extent in (("width", self.width), ("height", self.height)):
            cells = extent * self.grid_resolution
            if abs(cells - round(cells)) > 1e-9:
                raise ValueError(f"grid_resolution does not tile the scene {axis} exactly")
        for i, ob in enumerate(self.obstacles):
            if not (
                0.0 <= ob.x_min and ob.x_max <= self.width
                and 0.0 <= ob.y_min and ob.y_max <= self.height
            ):
                raise ValueError(f"obstacle {i} extends outside the scene box")
        if self.free_cell_centers().shape[0] < 1:
            raise ValueError("scene has no free cells")

    @property
    def cells_x(self) -> int:
        return int(round(self.width * self.grid_resolution))

    @property
    def cells_y(self) -> int:
        return int(round(self.height * self.grid_resolution))

    def cell_centers(self) -> np.ndarray:
        """Centers of all grid cells, shape (cells_x * cells_y, 2)."""
        step = 1.0 / self.grid_resolution
        xs = (np.arange(self.cells_x) + 0.5) * step
        ys = (np.arange(self.cells_y) + 0.5) * step
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        return np.column_stack([gx.ravel(), gy.ravel()])

    def free_cell_centers(self) -> np.ndarray:
        centers = self.cell_centers()
        blocked = np.zeros(centers.shape[0], dtype=bool)
        for ob in self.obstacles:
            blocked |= (
                (centers[:, 0] >= ob.x_min) & (centers[:, 0] <= ob.x_max)
                & (centers[:, 1] >= ob.y_min) & (centers[:, 1] <= ob.y_max)
            )
        return centers[~blocked]

    def placement_domain(self) -> BoxDomain:
        lower = np.tile([0.0, 0.0, 0.0], self.camera_count)
        upper = np.tile([self.width, self.height, TWO_PI], self.camera_count)
        return BoxDomain(lower, upper)

    def blocks(self) -> BlockStructure:
        return BlockStructure.uniform(self.camera_count, 3)


def _segments_hit_rect(
    px: float, py: float, tx: np.ndarray, ty: np.ndarray, ob: Obstacle
) -> np.ndarray:
    """Closed segment-vs-rectangle test from (px, py) to each (tx, ty).

    Slab clipping with closed comparisons: touching a corner, grazing an edge,
    or an endpoint on the boundary all count as hits.
    """
    dx = tx - px
    dy = ty - py
    tmin = np.zeros_like(tx)
    tmax = np.ones_like(tx)
    for p, d, lo, hi in ((px, dx, ob.x_min, ob.x_max), (py, dy, ob.y_min, ob.y_max)):
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = (lo - p) / d
            t2 = (hi - p) / d
        near = np.minimum(t1, t2)
        far = np.maximum(t1, t2)
        parallel = d == 0.0
        in_slab = lo <= p <= hi
        near = np.where(parallel, -np.inf if in_slab else np.inf, near)
        far = np.where(parallel, np.inf if in_slab else -np.inf, far)
        tmin = np.maximum(tmin, near)
        tmax = np.minimum(tmax, far)
    return tmin <= tmax


def visible_cells(
    scene: CoverageScene,
    camera: np.ndarray,
    centers: np.ndarray | None = None,
) -> np.ndarray:
    """Boolean visibility mask over free cell centers for one (x, y, heading).

    The cell holding the camera itself counts as visible (zero distance, the
    angle condition is vacuous there).
    """
    x, y, heading = (float(v) for v in np.asarray(camera, dtype=float))
    if centers is None:
        centers = scene.free_cell_centers()
    if any(ob.contains(x, y) for ob in scene.obstacles):
        return np.zeros(centers.shape[0], dtype=bool)

    dx = centers[:, 0] - x
    dy = centers[:, 1] - y
    dist = np.hypot(dx, dy)
    ok = dist <= scene.camera_model.sight_range

    cos_half = np.cos(scene.camera_model.fov_half_angle)
    hx, hy = np.cos(heading), np.sin(heading)
    with np.errstate(invalid="ignore"):
        cos_angle = np.where(dist > 0.0, (dx * hx + dy * hy) / np.where(dist > 0, dist, 1.0), 1.0)
    ok &= cos_angle >= cos_half - 1e-12

    for ob in scene.obstacles:
        if not np.any(ok):
            break
        ok &= ~_segments_hit_rect(x, y, centers[:, 0], centers[:, 1], ob)
    return ok


def coverage_objective(scene: CoverageScene) -> DecomposedObjective:
    """Fraction of free cells covered by the union of all camera footprints.

    sigma_m maps one camera block to its visible-cell index set; the fuse
    counts the union.  Cameras are interchangeable, so the full symmetric
    group over blocks applies.
    """
    centers = scene.free_cell_centers()
    n_free = centers.shape[0]

    def sigma(m: int, block: np.ndarray) -> frozenset:
        mask = visible_cells(scene, block, centers)
        return frozenset(np.nonzero(mask)[0].tolist())

    def fuse(observations: Sequence[frozenset]) -> float:
        union: set = set()
        for obs in observations:
            union |= obs
        return len(union) / n_free

    return DecomposedObjective(
        name=f"coverage({scene.camera_count} cameras)",
        sigma=sigma,
        fuse=fuse,
        blocks=scene.blocks(),
        domain=scene.placement_domain(),
        symmetry=full_symmetric_group(scene.camera_count),
        known_max=None,
    )


def coverage_fraction(scene: CoverageScene, constellation: np.ndarray) -> float:
    """Coverage of an explicit constellation without touching any cache."""
    centers = scene.free_cell_centers()
    seen = np.zeros(centers.shape[0], dtype=bool)
    x = np.asarray(constellation, dtype=float).reshape(scene.camera_count, 3)
    for cam in x:
        seen |= visible_cells(scene, cam, centers)
    return float(np.count_nonzero(seen)) / centers.shape[0]


def corner_constellation(scene: CoverageScene) -> np.ndarray:
    """Heuristic placement: cameras inset at the corners (then wall midpoints),
    each aimed at the scene center."""
    w, h = scene.width, scene.height
    inset = 0.05 * min(w, h)
    spots = [
        (inset, inset),
        (w - inset, inset),
        (w - inset, h - inset),
        (inset, h - inset),
        (w / 2.0, inset),
        (w - inset, h / 2.0),
        (w / 2.0, h - inset),
        (inset, h / 2.0),
    ]
    out = np.zeros(scene.camera_count * 3)
    for m in range(scene.camera_count):
        px, py = spots[m % len(spots)]
        heading = float(np.arctan2(h / 2.0 - py, w / 2.0 - px)) % TWO_PI
        out[3 * m: 3 * m + 3] = (px, py, heading)
    return out
