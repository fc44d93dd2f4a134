"""Deterministic 64-bit seed derivation.

Run seeds are derived by splitmix64 finalization chained over the master seed,
an FNV-1a hash of the mode name, and the run index:

    run_seed = splitmix64(splitmix64(master ^ fnv1a64(mode)) ^ run_index)

Documented so reports stay reproducible across releases.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One splitmix64 step: increment by the golden gamma, then finalize."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h = ((h ^ b) * 0x100000001B3) & _MASK
    return h


def derive_run_seed(master_seed: int, mode: str, run_index: int) -> int:
    return splitmix64(splitmix64((master_seed & _MASK) ^ fnv1a64(mode.encode())) ^ run_index)


class SeedStream:
    """Deterministic stream of 64-bit seeds for structured sub-operations."""

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next(self) -> int:
        self._state = splitmix64(self._state)
        return self._state
