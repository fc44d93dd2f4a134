"""Box domains and contiguous block structures shared by the whole library."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class BoxDomain:
    """Axis-aligned box with strictly positive range in every coordinate."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self) -> None:
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        if lower.ndim != 1 or lower.shape != upper.shape:
            raise ValueError("lower and upper must be 1-D arrays of equal length")
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise ValueError("domain bounds must be finite")
        if np.any(lower >= upper):
            bad = int(np.argmax(lower >= upper))
            raise ValueError(f"degenerate domain: coordinate {bad} has zero or negative range")
        lower.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dimension(self) -> int:
        return self.lower.shape[0]

    @property
    def ranges(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.upper - self.lower))

    def contains(self, x: np.ndarray, atol: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower - atol) and np.all(x <= self.upper + atol))

    def clip(self, x: np.ndarray) -> np.ndarray:
        return np.clip(np.asarray(x, dtype=float), self.lower, self.upper)

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Uniform points, shape (count, dimension)."""
        return rng.uniform(self.lower, self.upper, size=(count, self.dimension))

    @classmethod
    def cube(cls, lower: float, upper: float, dimension: int) -> "BoxDomain":
        return cls(np.full(dimension, float(lower)), np.full(dimension, float(upper)))


@dataclass(frozen=True)
class BlockStructure:
    """Partition of coordinates 0..n-1 into contiguous, ordered, disjoint blocks."""

    spans: tuple[tuple[int, int], ...]
    _slices: tuple[slice, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.spans:
            raise ValueError("at least one block is required")
        spans = tuple((int(a), int(b)) for a, b in self.spans)
        cursor = 0
        for i, (start, stop) in enumerate(spans):
            if start != cursor or stop <= start:
                raise ValueError(f"block {i} is not contiguous with its predecessor")
            cursor = stop
        object.__setattr__(self, "spans", spans)
        object.__setattr__(self, "_slices", tuple(slice(a, b) for a, b in spans))

    @classmethod
    def uniform(cls, block_count: int, width: int) -> "BlockStructure":
        if block_count < 1 or width < 1:
            raise ValueError("block_count and width must be positive")
        return cls(tuple((m * width, (m + 1) * width) for m in range(block_count)))

    @classmethod
    def from_widths(cls, widths: "list[int] | tuple[int, ...]") -> "BlockStructure":
        edges = np.concatenate([[0], np.cumsum(widths)]).astype(int)
        return cls(tuple((int(edges[i]), int(edges[i + 1])) for i in range(len(widths))))

    @property
    def block_count(self) -> int:
        return len(self.spans)

    @property
    def dimension(self) -> int:
        return self.spans[-1][1]

    def width(self, m: int) -> int:
        a, b = self.spans[m]
        return b - a

    def block_slice(self, m: int) -> slice:
        return self._slices[m]

    def extract(self, x: np.ndarray, m: int) -> np.ndarray:
        return np.asarray(x)[self._slices[m]]

    def splice(self, base: np.ndarray, m: int, block_values: np.ndarray) -> np.ndarray:
        """Copy of base with block m replaced."""
        out = np.array(base, dtype=float, copy=True)
        out[self._slices[m]] = block_values
        return out
