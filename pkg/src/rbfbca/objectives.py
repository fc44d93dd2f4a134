"""Block-decomposed objectives f = g(sigma_1, ..., sigma_M) with per-block
observation caching and evaluation counters.

sigma_m and g must be pure.  The cache keeps the last observation per block,
keyed by the bit pattern of the block's parameters, so repeated evaluations
that change a single block recompute exactly one sigma.  Counters make the
cost model observable: full evaluations, per-block sigma calls, fuse calls.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .domain import BlockStructure, BoxDomain
from .surrogate import SymmetryGroup, full_symmetric_group

class CacheCoherenceError(RuntimeError):
    """changed_block was given but some other block misses the cache."""


@dataclass
class EvalCounters:
    """Observable evaluation costs; sigma_calls is indexed by block."""

    full_evals: int = 0
    fuse_calls: int = 0
    sigma_calls: list[int] = field(default_factory=list)

    @classmethod
    def zero(cls, block_count: int) -> "EvalCounters":
        return cls(0, 0, [0] * block_count)

    @property
    def total_sigma_calls(self) -> int:
        return sum(self.sigma_calls)

    def copy(self) -> "EvalCounters":
        return EvalCounters(self.full_evals, self.fuse_calls, list(self.sigma_calls))


class DecomposedObjective:
    """f(x) = fuse(sigma_0(a_0), ..., sigma_{M-1}(a_{M-1})) over contiguous blocks.

    known_max / known_argmax are optional analytic metadata used by benchmark
    reporting (deviation = known_max - best achieved).
    """

    def __init__(
        self,
        name: str,
        sigma: Callable[[int, np.ndarray], Any],
        fuse: Callable[[Sequence[Any]], float],
        blocks: BlockStructure,
        domain: BoxDomain,
        symmetry: SymmetryGroup | None = None,
        known_max: float | None = None,
        known_argmax: np.ndarray | None = None,
    ):
        if blocks.dimension != domain.dimension:
            raise ValueError("block structure does not match the domain")
        if symmetry is not None and symmetry.block_count != blocks.block_count:
            raise ValueError("symmetry group size does not match the number of blocks")
        self.name = name
        self.sigma = sigma
        self.fuse = fuse
        self.blocks = blocks
        self.domain = domain
        self.symmetry = symmetry
        self.known_max = known_max
        self.known_argmax = None if known_argmax is None else np.asarray(known_argmax, float)
        self.counters = EvalCounters.zero(blocks.block_count)
        self._cache: list[tuple[bytes, Any] | None] = [None] * blocks.block_count
        self._lock = threading.Lock()

    @property
    def dimension(self) -> int:
        return self.domain.dimension

    @property
    def block_count(self) -> int:
        return self.blocks.block_count

    def reset(self) -> None:
        """Clear cache and counters."""
        with self._lock:
            self._cache = [None] * self.block_count
            self.counters = EvalCounters.zero(self.block_count)

    def cache_snapshot(self) -> list["tuple[bytes, Any] | None"]:
        """Copy of the cache for an isolated (e.g. concurrent) evaluation."""
        with self._lock:
            return list(self._cache)

    def adopt_block_entry(
        self, m: int, snapshot: "list[tuple[bytes, Any] | None]"
    ) -> None:
        """Merge block m's cache entry from a worker snapshot back into the
        shared cache.  Called in block order after a parallel sweep so the
        merged state is independent of worker scheduling."""
        with self._lock:
            self._cache[m] = snapshot[m]

    def evaluate(
        self,
        x: np.ndarray,
        changed_block: int | None = None,
        *,
        cache: "list[tuple[bytes, Any] | None] | None" = None,
    ) -> float:
        """Objective value at x, recomputing sigma only for cache misses.

        With changed_block given, every other block must bit-match its cache
        key (CacheCoherenceError otherwise), so exactly one sigma runs.  An
        explicit cache list evaluates against that state instead of the shared
        one; the shared counters are still updated.
        """
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dimension,):
            raise ValueError(f"point must have length {self.dimension}")
        if not self.domain.contains(x, atol=1e-7 * (1.0 + self.domain.diameter)):
            raise ValueError(f"point {x} lies outside the domain")
        if changed_block is not None and not 0 <= changed_block < self.block_count:
            raise ValueError(f"changed_block {changed_block} out of range")

        own = cache is None
        store = self._cache if own else cache
        keys = [x[self.blocks.block_slice(m)].tobytes() for m in range(self.block_count)]
        if own:
            self._lock.acquire()
        try:
            misses = [
                m
                for m in range(self.block_count)
                if store[m] is None or store[m][0] != keys[m]
            ]
            if changed_block is not None:
                stale = [m for m in misses if m != changed_block]
                if stale:
                    raise CacheCoherenceError(
                        f"changed_block={changed_block} but blocks {stale} miss the cache"
                    )
            for m in misses:
                obs = self.sigma(m, x[self.blocks.block_slice(m)].copy())
                store[m] = (keys[m], obs)
            observations = [store[m][1] for m in range(self.block_count)]
        finally:
            if own:
                self._lock.release()
        value = float(self.fuse(observations))
        # counters are shared even for external-cache evaluations
        with self._lock:
            for m in misses:
                self.counters.sigma_calls[m] += 1
            self.counters.fuse_calls += 1
            self.counters.full_evals += 1
        return value


def pyramid_peak(n: int) -> DecomposedObjective:
    """f(x) = -max_i |x_i + 2| on [-10, 10]^n: a non-differentiable peak at
    (-2, ..., -2) with value 0, invariant under coordinate permutations."""
    if n < 1:
        raise ValueError("dimension must be positive")
    return DecomposedObjective(
        name=f"pyramid_peak({n})",
        sigma=lambda m, a: float(a[0]),
        fuse=lambda obs: -max(abs(o + 2.0) for o in obs),
        blocks=BlockStructure.uniform(n, 1),
        domain=BoxDomain.cube(-10.0, 10.0, n),
        symmetry=full_symmetric_group(n),
        known_max=0.0,
        known_argmax=np.full(n, -2.0),
    )


def quantized_bowl(n: int) -> DecomposedObjective:
    """f(x) = -floor(||x - x*||) with x* = (-2, ..., -2) on [-10, 10]^n:
    piecewise-constant shells, gradient-free plateaus everywhere."""
    if n < 1:
        raise ValueError("dimension must be positive")

    def fuse(obs: Sequence[float]) -> float:
        r = math.sqrt(sum((o + 2.0) ** 2 for o in obs))
        return -float(math.floor(r))

    return DecomposedObjective(
        name=f"quantized_bowl({n})",
        sigma=lambda m, a: float(a[0]),
        fuse=fuse,
        blocks=BlockStructure.uniform(n, 1),
        domain=BoxDomain.cube(-10.0, 10.0, n),
        symmetry=full_symmetric_group(n),
        known_max=0.0,
        known_argmax=np.full(n, -2.0),
    )


def subspace_trap(block_count: int, block_dim: int = 1) -> DecomposedObjective:
    """f(x) = ||sum_m a_m||_1 - 2 sum_{m<m'} ||a_m - a_m'||_1 over blocks a_m
    in [-10, 10]^d.

    The global maximum 10 * M * d sits where all blocks agree at +/-10; the
    origin region is a trap: every single-block slice through a diagonal point
    peaks at the other blocks' value, so block-wise ascent stalls there.
    """
    if block_count < 2:
        raise ValueError("at least two blocks are required")
    if block_dim < 1:
        raise ValueError("block dimension must be positive")

    def fuse(obs: Sequence[np.ndarray]) -> float:
        arrs = [np.asarray(o, dtype=float) for o in obs]
        total = float(np.sum(np.abs(np.sum(arrs, axis=0))))
        spread = 0.0
        for i in range(len(arrs)):
            for j in range(i + 1, len(arrs)):
                spread += float(np.sum(np.abs(arrs[i] - arrs[j])))
        return total - 2.0 * spread

    n = block_count * block_dim
    return DecomposedObjective(
        name=f"subspace_trap({block_count},{block_dim})",
        sigma=lambda m, a: np.array(a, dtype=float),
        fuse=fuse,
        blocks=BlockStructure.uniform(block_count, block_dim),
        domain=BoxDomain.cube(-10.0, 10.0, n),
        symmetry=full_symmetric_group(block_count),
        known_max=10.0 * block_count * block_dim,
        known_argmax=np.full(n, 10.0),
    )
