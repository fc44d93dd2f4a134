"""Maximin exclusion radius and constrained surrogate maximization.

The search space is either the full box or a one-block affine slice through a
base point.  Both reduce to a box in the free coordinates; distances to
previously evaluated points split into an in-slice part and a constant
frozen-coordinate offset, so exclusion constraints become ball constraints in
the reduced coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.spatial.distance import cdist

from .domain import BlockStructure, BoxDomain
from .surrogate import RbfSurrogate

# Multi-start projected gradient ascent parameters.
ARMIJO_C = 1e-4
ARMIJO_SHRINK = 0.5
MAX_ASCENT_STEPS = 200
STARTS_PER_DIM = 16

# Maximin estimate: Latin hypercube candidates per free dimension, then
# projected coordinate-wise ternary-style interval refinement.
DELTA_CANDIDATES_PER_DIM = 256
DELTA_POLISH_STEPS = 50
_LADDER = 33  # probes per refinement level, endpoints included

# The relaxation ladder halves beta this many times before giving up.
MAX_BETA_HALVINGS = 6


class InfeasibleSearchError(RuntimeError):
    """No feasible start even after the beta relaxation ladder."""

    def __init__(self, message: str, beta_final: float):
        super().__init__(message)
        self.beta_final = beta_final


@dataclass(frozen=True)
class SearchSpace:
    """Full domain or a single-block slice through a base point."""

    domain: BoxDomain
    free_indices: np.ndarray
    base_point: np.ndarray
    block_index: int | None = None
    _frozen_indices: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        free = np.asarray(self.free_indices, dtype=int)
        base = np.asarray(self.base_point, dtype=float)
        if base.shape != (self.domain.dimension,):
            raise ValueError("base point length must match the domain")
        if free.size == 0:
            raise ValueError("search space has no free coordinates")
        free.setflags(write=False)
        base.setflags(write=False)
        frozen = np.setdiff1d(np.arange(self.domain.dimension), free)
        frozen.setflags(write=False)
        object.__setattr__(self, "free_indices", free)
        object.__setattr__(self, "base_point", base)
        object.__setattr__(self, "_frozen_indices", frozen)

    @classmethod
    def full(cls, domain: BoxDomain) -> "SearchSpace":
        center = 0.5 * (domain.lower + domain.upper)
        return cls(domain, np.arange(domain.dimension), center, None)

    @classmethod
    def subspace(
        cls, domain: BoxDomain, blocks: BlockStructure, m: int, base: np.ndarray
    ) -> "SearchSpace":
        if blocks.dimension != domain.dimension:
            raise ValueError("block structure does not match the domain")
        a, b = blocks.spans[m]
        return cls(domain, np.arange(a, b), np.asarray(base, dtype=float), m)

    @property
    def kind(self) -> str:
        return "full-domain" if self.block_index is None else f"subspace({self.block_index})"

    @property
    def dim(self) -> int:
        return int(self.free_indices.size)

    @property
    def reduced_lower(self) -> np.ndarray:
        return self.domain.lower[self.free_indices]

    @property
    def reduced_upper(self) -> np.ndarray:
        return self.domain.upper[self.free_indices]

    def embed_many(self, reduced: np.ndarray) -> np.ndarray:
        """Lift reduced coordinates (m, dim) to full vectors (m, n)."""
        reduced = np.atleast_2d(reduced)
        out = np.tile(self.base_point, (reduced.shape[0], 1))
        out[:, self.free_indices] = reduced
        return out

    def embed(self, reduced: np.ndarray) -> np.ndarray:
        return self.embed_many(reduced)[0]

    def frozen_offsets_sq(self, previous: np.ndarray) -> np.ndarray:
        """Squared distance of each previous point to the slice, shape (K,)."""
        if self._frozen_indices.size == 0:
            return np.zeros(previous.shape[0])
        diff = previous[:, self._frozen_indices] - self.base_point[self._frozen_indices]
        return np.sum(diff * diff, axis=1)


def _min_dist_sq(reduced: np.ndarray, centers_red: np.ndarray, off_sq: np.ndarray) -> np.ndarray:
    """min_k ||embed(z) - s_k||^2 for rows z of reduced, shape (m,)."""
    d2 = cdist(np.atleast_2d(reduced), centers_red, metric="sqeuclidean") + off_sq
    return np.min(d2, axis=1)


def _latin_hypercube(
    rng: np.random.Generator, count: int, lower: np.ndarray, upper: np.ndarray
) -> np.ndarray:
    d = lower.shape[0]
    u = (rng.random((count, d)) + np.stack([rng.permutation(count) for _ in range(d)], axis=1)) / count
    return lower + u * (upper - lower)


def compute_delta(space: SearchSpace, previous: np.ndarray, rng: np.random.Generator) -> float:
    """Maximin exclusion radius: max over the space of the distance to the
    nearest previous point.

    Estimated from a seeded Latin hypercube sample followed by projected
    coordinate-wise interval refinement of the best candidate; the result is
    never below the best sampled value.  Deterministic for a given rng state
    and invariant to the order of previous points.
    """
    previous = np.atleast_2d(np.asarray(previous, dtype=float))
    if previous.size == 0:
        raise ValueError("previous points must be non-empty")
    lo, hi = space.reduced_lower, space.reduced_upper
    d = space.dim
    centers_red = previous[:, space.free_indices]
    off_sq = space.frozen_offsets_sq(previous)

    cand = _latin_hypercube(rng, DELTA_CANDIDATES_PER_DIM * d, lo, hi)
    dmin = _min_dist_sq(cand, centers_red, off_sq)
    best = int(np.argmax(dmin))
    z = cand[best].copy()
    best_sq = float(dmin[best])

    for step in range(DELTA_POLISH_STEPS):
        j = step % d
        a, b = lo[j], hi[j]
        for _ in range(2):  # two refinement levels per coordinate step
            ladder = np.linspace(a, b, _LADDER)
            probes = np.tile(z, (_LADDER, 1))
            probes[:, j] = ladder
            vals = _min_dist_sq(probes, centers_red, off_sq)
            k = int(np.argmax(vals))
            if vals[k] > best_sq:
                best_sq = float(vals[k])
                z = probes[k].copy()
            h = (b - a) / (_LADDER - 1)
            a = max(lo[j], ladder[k] - h)
            b = min(hi[j], ladder[k] + h)
    return float(np.sqrt(best_sq))


class SearchOutcome(NamedTuple):
    point: np.ndarray          # full-dimensional selected point
    delta: float               # maximin radius of the search space
    beta_effective: float      # beta after any relaxation halvings
    min_distance: float        # distance from point to nearest previous point


def _push_out_of_balls(
    Z: np.ndarray, ball_centers: np.ndarray, ball_radii: np.ndarray
) -> np.ndarray:
    """Move rows of Z radially to the surface of any exclusion ball they entered."""
    if ball_centers.shape[0] == 0:
        return Z
    for _ in range(3):
        d2 = cdist(Z, ball_centers, metric="sqeuclidean")
        inside = d2 < ball_radii[None, :] ** 2
        if not np.any(inside):
            break
        # resolve the deepest violation per point, then re-check
        depth = np.where(inside, ball_radii[None, :] ** 2 - d2, -np.inf)
        worst = np.argmax(depth, axis=1)
        rows = np.nonzero(np.any(inside, axis=1))[0]
        for i in rows:
            k = worst[i]
            v = Z[i] - ball_centers[k]
            norm = float(np.linalg.norm(v))
            if norm < 1e-300:
                v = np.zeros_like(v)
                v[0] = 1.0
                norm = 1.0
            Z[i] = ball_centers[k] + v * (ball_radii[k] / norm)
    return Z


def search_next(
    space: SearchSpace,
    surrogate: RbfSurrogate,
    previous: np.ndarray,
    beta: float,
    rng: np.random.Generator,
) -> SearchOutcome:
    """Maximize the surrogate over the space subject to staying at least
    beta * delta away from every previous point.

    Multi-start projected gradient ascent from seeded uniform starts filtered
    to feasibility; iterates are clipped to the box and pushed out of
    exclusion balls radially.  If no start is feasible, beta is halved up to
    six times before InfeasibleSearchError.  Ties between equally good starts
    go to the lowest start index.
    """
    if not 0.0 <= beta < 1.0:
        raise ValueError("beta must lie in [0, 1)")
    previous = np.atleast_2d(np.asarray(previous, dtype=float))
    lo, hi = space.reduced_lower, space.reduced_upper
    d = space.dim
    feas_tol = 1e-6 * space.domain.diameter

    delta = compute_delta(space, previous, rng)
    centers_red = previous[:, space.free_indices]
    off_sq = space.frozen_offsets_sq(previous)

    starts = rng.uniform(lo, hi, size=(STARTS_PER_DIM * d, d))
    start_min = np.sqrt(_min_dist_sq(starts, centers_red, off_sq))

    beta_eff = beta
    for halving in range(MAX_BETA_HALVINGS + 1):
        feasible = start_min >= beta_eff * delta
        if np.any(feasible):
            break
        if halving < MAX_BETA_HALVINGS:
            beta_eff *= 0.5
    else:
        raise InfeasibleSearchError(
            f"no feasible start after {MAX_BETA_HALVINGS} beta halvings "
            f"(final beta {beta_eff:g}, delta {delta:g})",
            beta_final=beta_eff,
        )

    threshold = beta_eff * delta
    # balls that actually intersect the slice, in reduced coordinates
    active = off_sq < threshold**2
    ball_centers = centers_red[active]
    ball_radii = np.sqrt(threshold**2 - off_sq[active])

    Z = starts[feasible].copy()
    fZ = surrogate.evaluate_batch(space.embed_many(Z))
    span = float(np.max(hi - lo))
    step = np.full(Z.shape[0], 0.25 * span)
    alive = np.ones(Z.shape[0], dtype=bool)

    for _ in range(MAX_ASCENT_STEPS):
        if not np.any(alive):
            break
        G = surrogate.gradient_batch(space.embed_many(Z[alive]))[:, space.free_indices]
        gn2 = np.sum(G * G, axis=1)
        cand = Z[alive] + step[alive, None] * G
        np.clip(cand, lo, hi, out=cand)
        cand = _push_out_of_balls(cand, ball_centers, ball_radii)
        np.clip(cand, lo, hi, out=cand)
        fc = surrogate.evaluate_batch(space.embed_many(cand))
        accept = fc >= fZ[alive] + ARMIJO_C * step[alive] * gn2
        idx = np.nonzero(alive)[0]
        acc, rej = idx[accept], idx[~accept]
        Z[acc] = cand[accept]
        fZ[acc] = fc[accept]
        step[acc] = np.minimum(step[acc] * 1.25, span)
        step[rej] *= ARMIJO_SHRINK
        # anything moving less than 1e-9 of the span is noise relative to the
        # 1e-6-of-diameter feasibility tolerance; retire those starts
        alive[idx] = (step[idx] > 1e-9 * span) & (gn2 > 1e-24)

    # keep only polished points that honor the constraint; fall back to the
    # (feasible by construction) start otherwise
    final_min = np.sqrt(_min_dist_sq(Z, centers_red, off_sq))
    bad = final_min < threshold - feas_tol
    if np.any(bad):
        Z[bad] = starts[feasible][bad]
        fZ[bad] = surrogate.evaluate_batch(space.embed_many(Z[bad]))
        final_min[bad] = start_min[feasible][bad]

    best = int(np.argmax(fZ))  # first maximum wins: lowest start index
    return SearchOutcome(
        point=space.embed(Z[best]),
        delta=delta,
        beta_effective=beta_eff,
        min_distance=float(final_min[best]),
    )
