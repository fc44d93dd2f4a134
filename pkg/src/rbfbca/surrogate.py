"""Thin-plate-spline interpolant with a degree-1 tail, block symmetry closure,
and incremental point updates via full refits.

The interpolant has the form

    s(x) = sum_k w_k * phi(||x - c_k||) + a . x + b,    phi(r) = r^2 log r,

with phi(0) = 0 and the weights orthogonal to all degree-1 polynomials.  The
coefficients come from the dense symmetric augmented system

    [ Phi  P ] [w]   [f]
    [ P^T  0 ] [t] = [0],     P row k = (c_k, 1),

solved by LU with partial pivoting plus one iterative-refinement pass.  A
singular solve is retried once with Tikhonov regularization on the Phi block.
"""

from __future__ import annotations

import itertools
import logging
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve
from scipy.spatial.distance import cdist

from .domain import BlockStructure

logger = logging.getLogger(__name__)

# Regularization used on the second solve attempt when LU hits a singular pivot
# or the residual check fails.
TIKHONOV_LAMBDA = 1e-10

# Orbits larger than this insert the original plus this many sampled members.
DEFAULT_MAX_ORBIT = 720

_TINY = np.finfo(float).tiny


class InsufficientPointsError(ValueError):
    """Fewer than dimension + 1 centers were supplied."""


class DegenerateGeometryError(ValueError):
    """Duplicate or affinely dependent centers make the system singular."""


def kernel_eval(r):
    """Thin-plate kernel r^2 log r with the removable singularity closed: phi(0) = 0."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("kernel argument must be non-negative")
    safe = np.where(r > 0, r, 1.0)
    out = np.where(r > 0, r * r * np.log(safe), 0.0)
    return float(out) if out.ndim == 0 else out


def kernel_deriv(r):
    """Derivative 2 r log r + r, zero at r = 0."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("kernel argument must be non-negative")
    safe = np.where(r > 0, r, 1.0)
    out = np.where(r > 0, 2.0 * r * np.log(safe) + r, 0.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class EvaluationPoint:
    """A sampled point and its (finite) objective value."""

    point: np.ndarray
    value: float

    def __post_init__(self) -> None:
        point = np.array(self.point, dtype=float, copy=True)
        if point.ndim != 1:
            raise ValueError("point must be a 1-D vector")
        if not np.all(np.isfinite(point)):
            raise ValueError("point coordinates must be finite")
        value = float(self.value)
        if not np.isfinite(value):
            raise ValueError("objective value must be finite")
        point.setflags(write=False)
        object.__setattr__(self, "point", point)
        object.__setattr__(self, "value", value)


@dataclass(frozen=True)
class SymmetryGroup:
    """Block permutations under which the objective is invariant.

    Permutations are tuples p of block indices: image block m takes its values
    from source block p[m].  The identity must be present; supplying the full
    invariance group makes one application of every member yield the orbit.
    """

    block_permutations: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        perms = tuple(tuple(int(i) for i in p) for p in self.block_permutations)
        if not perms:
            raise ValueError("at least one permutation is required")
        size = len(perms[0])
        ident = tuple(range(size))
        for p in perms:
            if len(p) != size or sorted(p) != list(ident):
                raise ValueError(f"{p} is not a permutation of 0..{size - 1}")
        if ident not in perms:
            raise ValueError("the identity permutation must be present")
        object.__setattr__(self, "block_permutations", perms)

    @property
    def block_count(self) -> int:
        return len(self.block_permutations[0])


def full_symmetric_group(block_count: int) -> SymmetryGroup:
    """All block_count! permutations; factorial growth, keep block_count small."""
    if block_count < 1:
        raise ValueError("block_count must be positive")
    if block_count > 8:
        raise ValueError("full symmetric group beyond 8 blocks is impractical")
    return SymmetryGroup(tuple(itertools.permutations(range(block_count))))


def symmetric_closure(
    point: np.ndarray,
    blocks: BlockStructure,
    group: SymmetryGroup,
    *,
    max_orbit: int = DEFAULT_MAX_ORBIT,
    rng: np.random.Generator | None = None,
) -> list[np.ndarray]:
    """Orbit of point under the group's block permutations, original first.

    Exact duplicates (blocks with equal parameters permuted onto each other)
    are dropped.  Orbits larger than max_orbit keep the original plus
    max_orbit sampled members so factorial groups cannot swamp the solve.
    """
    x = np.asarray(point, dtype=float)
    if x.ndim != 1 or x.shape[0] != blocks.dimension:
        raise ValueError("point length must match the block structure")
    if group.block_count != blocks.block_count:
        raise ValueError("permutation size must match the number of blocks")
    images: list[np.ndarray] = []
    seen: set[bytes] = set()
    for p in group.block_permutations:
        y = np.empty_like(x)
        for m, src in enumerate(p):
            if blocks.width(m) != blocks.width(src):
                raise ValueError(
                    f"permutation maps block {src} (width {blocks.width(src)}) "
                    f"onto block {m} (width {blocks.width(m)})"
                )
            y[blocks.block_slice(m)] = x[blocks.block_slice(src)]
        key = y.tobytes()
        if key not in seen:
            seen.add(key)
            images.append(y)
    # images[0] is the identity image == point
    if len(images) - 1 > max_orbit:
        rng = rng if rng is not None else np.random.default_rng(0)
        idx = rng.choice(len(images) - 1, size=max_orbit, replace=False) + 1
        images = [images[0]] + [images[int(i)] for i in sorted(idx)]
    return images


@dataclass(frozen=True)
class RbfSurrogate:
    """Fitted interpolant.  Immutable; updates return a new surrogate."""

    centers: np.ndarray        # (K, n)
    values: np.ndarray         # (K,)
    weights: np.ndarray        # (K,)
    tail_linear: np.ndarray    # (n,)
    tail_constant: float

    def __post_init__(self) -> None:
        for name in ("centers", "values", "weights", "tail_linear"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def dimension(self) -> int:
        return self.centers.shape[1]

    @property
    def center_count(self) -> int:
        return self.centers.shape[0]

    def evaluate(self, x: np.ndarray) -> float:
        return float(self.evaluate_batch(np.asarray(x, dtype=float)[None, :])[0])

    def evaluate_batch(self, points: np.ndarray) -> np.ndarray:
        """Interpolant values at rows of points, shape (m,)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        r = cdist(pts, self.centers)
        return kernel_eval(r) @ self.weights + pts @ self.tail_linear + self.tail_constant

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return self.gradient_batch(np.asarray(x, dtype=float)[None, :])[0]

    def gradient_batch(self, points: np.ndarray) -> np.ndarray:
        """Gradients at rows of points, shape (m, n).

        Each kernel term contributes w_k * phi'(r)/r * (x - c_k); the factor
        phi'(r)/r = 2 log r + 1 is paired with (x - c_k) so the product
        vanishes as r -> 0, and terms at r = 0 are dropped outright.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        r = cdist(pts, self.centers)
        safe = np.where(r > _TINY, r, 1.0)
        coef = np.where(r > _TINY, 2.0 * np.log(safe) + 1.0, 0.0) * self.weights
        diffs = pts[:, None, :] - self.centers[None, :, :]
        return np.einsum("mk,mkn->mn", coef, diffs) + self.tail_linear


def _solve_augmented(
    S: np.ndarray, f: np.ndarray, dists: np.ndarray | None = None
) -> tuple[np.ndarray, np.ndarray, float]:
    """Solve the interpolation system, retrying once with regularization."""
    K, n = S.shape
    # the linear tail is identifiable only for affinely independent centers;
    # a rank-deficient tail matrix leaves a direction the data cannot pin down
    if np.linalg.matrix_rank(np.column_stack([S, np.ones(K)])) < n + 1:
        raise DegenerateGeometryError(
            "centers are affinely dependent; the linear tail is not identifiable"
        )
    size = K + n + 1
    A = np.zeros((size, size))
    A[:K, :K] = kernel_eval(cdist(S, S) if dists is None else dists)
    A[:K, K:K + n] = S
    A[:K, K + n] = 1.0
    A[K:K + n, :K] = S.T
    A[K + n, :K] = 1.0
    b = np.zeros(size)
    b[:K] = f
    tol = 1e-9 * (1.0 + np.max(np.abs(f)))

    for attempt in range(2):
        if attempt == 1:
            A[:K, :K] += TIKHONOV_LAMBDA * np.eye(K)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", LinAlgWarning)
                lu, piv = lu_factor(A)
                z = lu_solve((lu, piv), b)
                if np.all(np.isfinite(z)):
                    # one iterative-refinement pass tightens interpolation residuals
                    z += lu_solve((lu, piv), b - A @ z)
        except np.linalg.LinAlgError:
            continue
        if np.all(np.isfinite(z)) and np.max(np.abs(A @ z - b)) <= tol:
            return z[:K], z[K:K + n], float(z[K + n])
    raise DegenerateGeometryError(
        "interpolation system is singular even after regularization; "
        "centers are affinely dependent or too close"
    )


def _check_duplicates(S: np.ndarray, dists: np.ndarray, tol: float) -> None:
    D = dists.copy()
    np.fill_diagonal(D, np.inf)
    if np.min(D) < tol:
        i, j = np.unravel_index(int(np.argmin(D)), D.shape)
        raise DegenerateGeometryError(
            f"centers {min(i, j)} and {max(i, j)} coincide within tolerance {tol:g}: "
            f"{S[i]} vs {S[j]}"
        )


def _default_duplicate_tol(S: np.ndarray) -> float:
    spread = float(np.max(np.ptp(S, axis=0))) if S.shape[0] > 1 else 0.0
    return 1e-8 * max(spread, 1.0)


def fit(
    points: Sequence[EvaluationPoint],
    *,
    duplicate_tol: float | None = None,
) -> RbfSurrogate:
    """Fit the interpolant through the given points.

    Requires at least n + 1 points in dimension n with an affinely independent
    subset.  duplicate_tol defaults to 1e-8 times the point-cloud extent;
    callers that know the domain should pass 1e-8 * domain diameter.
    """
    pts = list(points)
    if not pts:
        raise InsufficientPointsError("no points supplied")
    S = np.array([p.point for p in pts], dtype=float)
    f = np.array([p.value for p in pts], dtype=float)
    K, n = S.shape
    if K < n + 1:
        raise InsufficientPointsError(
            f"{K} points cannot determine a degree-1 tail in dimension {n}; need {n + 1}"
        )
    tol = duplicate_tol if duplicate_tol is not None else _default_duplicate_tol(S)
    dists = cdist(S, S)
    _check_duplicates(S, dists, tol)
    w, a, b = _solve_augmented(S, f, dists)
    return RbfSurrogate(centers=S, values=f, weights=w, tail_linear=a, tail_constant=b)


class UpdateResult(NamedTuple):
    surrogate: RbfSurrogate
    best_point: np.ndarray
    best_value: float


def update(
    surrogate: RbfSurrogate,
    new_point: EvaluationPoint,
    blocks: BlockStructure | None = None,
    group: SymmetryGroup | None = None,
    *,
    duplicate_tol: float | None = None,
    max_orbit: int = DEFAULT_MAX_ORBIT,
    rng: np.random.Generator | None = None,
) -> UpdateResult:
    """Insert new_point (plus its symmetric closure when a group is given),
    refit, and return the refit surrogate with the running maximum pair.

    Candidates that duplicate an existing center are skipped with a log
    notice: the value is already represented.  Skipping everything returns the
    surrogate unchanged.
    """
    candidates: list[np.ndarray]
    if group is not None:
        if blocks is None:
            raise ValueError("blocks are required when a symmetry group is given")
        candidates = symmetric_closure(
            new_point.point, blocks, group, max_orbit=max_orbit, rng=rng
        )
    else:
        candidates = [np.asarray(new_point.point, dtype=float)]

    existing = surrogate.centers
    tol = (
        duplicate_tol
        if duplicate_tol is not None
        else _default_duplicate_tol(np.vstack([existing, candidates[0][None, :]]))
    )
    kept: list[np.ndarray] = []
    for c in candidates:
        against = existing if not kept else np.vstack([existing, kept])
        if float(np.min(np.linalg.norm(against - c, axis=1))) < tol:
            logger.debug("skipping duplicate center %s (value already represented)", c)
            continue
        kept.append(c)

    if kept:
        S = np.vstack([existing, kept])
        f = np.concatenate([surrogate.values, np.full(len(kept), new_point.value)])
        w, a, b = _solve_augmented(S, f)
        surrogate = RbfSurrogate(
            centers=S, values=f, weights=w, tail_linear=a, tail_constant=b
        )
    best = int(np.argmax(surrogate.values))
    return UpdateResult(surrogate, surrogate.centers[best].copy(), float(surrogate.values[best]))
