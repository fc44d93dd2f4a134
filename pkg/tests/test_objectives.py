import concurrent.futures

import numpy as np
import pytest

from rbfbca.objectives import (
    CacheCoherenceError,
    DecomposedObjective,
    EvalCounters,
    pyramid_peak,
    quantized_bowl,
    subspace_trap,
)
from rbfbca.domain import BlockStructure, BoxDomain


def test_pyramid_values():
    obj = pyramid_peak(2)
    assert obj.evaluate(np.array([-2.0, -2.0])) == 0.0
    assert obj.evaluate(np.array([0.0, 0.0])) == -2.0
    assert obj.evaluate(np.array([1.0, -5.0])) == -3.0
    assert obj.evaluate(np.array([6.0, 7.5])) == -9.5
    assert obj.known_max == 0.0
    assert obj.evaluate(obj.known_argmax) == obj.known_max


def test_pyramid_is_permutation_invariant():
    obj = pyramid_peak(3)
    rng = np.random.default_rng(0)
    for _ in range(20):
        x = rng.uniform(-10, 10, size=3)
        assert obj.evaluate(x) == obj.evaluate(x[::-1].copy())


def test_quantized_bowl_shells():
    obj = quantized_bowl(2)
    center = np.array([-2.0, -2.0])
    assert obj.evaluate(center) == 0.0
    # anything strictly inside the unit shell still reads zero
    assert obj.evaluate(center + np.array([0.7, 0.7])) == 0.0
    assert obj.evaluate(center + np.array([3.0, 0.0])) == -3.0
    # radii 2.3 and 2.9 land on the same shell
    a = obj.evaluate(center + np.array([2.3, 0.0]))
    b = obj.evaluate(center + np.array([0.0, 2.9]))
    assert a == b == -2.0


def test_trap_closed_form_two_blocks():
    # with two 1-d blocks: f(x, y) = |x + y| - 2|x - y|
    obj = subspace_trap(2, 1)
    cases = [
        ((10.0, 10.0), 20.0),
        ((-10.0, -10.0), 20.0),
        ((0.5, -0.5), -2.0),
        ((-0.5, -0.5), 1.0),
        ((3.0, 3.0), 6.0),
        ((10.0, -10.0), -40.0),
    ]
    for (x, y), want in cases:
        assert obj.evaluate(np.array([x, y])) == pytest.approx(want, abs=1e-12)
    assert obj.known_max == 20.0


def test_trap_wider_blocks():
    obj = subspace_trap(3, 2)
    assert obj.dimension == 6
    assert obj.known_max == 60.0
    assert obj.evaluate(np.full(6, 10.0)) == 60.0
    # one disagreeing block pays the spread penalty twice
    x = np.array([10.0, 10.0, 10.0, 10.0, 0.0, 0.0])
    # total = |20| + |20| = 40; spread = 0 + 20 + 20 = 40
    assert obj.evaluate(x) == pytest.approx(40.0 - 80.0, abs=1e-12)


def test_sigma_counts_follow_block_changes():
    obj = subspace_trap(3, 1)
    x = np.array([1.0, 2.0, 3.0])
    obj.evaluate(x)
    assert obj.counters.sigma_calls == [1, 1, 1]
    y = x.copy()
    y[1] = 5.0
    obj.evaluate(y, changed_block=1)
    assert obj.counters.sigma_calls == [1, 2, 1]
    assert obj.counters.full_evals == 2
    assert obj.counters.fuse_calls == 2
    # a bit-identical repeat costs no sigma at all
    obj.evaluate(y, changed_block=1)
    assert obj.counters.sigma_calls == [1, 2, 1]
    assert obj.counters.full_evals == 3


def test_coherence_error_when_untouched_block_misses():
    obj = subspace_trap(3, 1)
    x = np.array([1.0, 2.0, 3.0])
    obj.evaluate(x)
    z = x.copy()
    z[0] = 4.0
    z[2] = 6.0
    with pytest.raises(CacheCoherenceError):
        obj.evaluate(z, changed_block=0)
    # the failed call charged nothing
    assert obj.counters.full_evals == 1
    assert obj.counters.sigma_calls == [1, 1, 1]


def test_evaluate_input_validation():
    obj = pyramid_peak(2)
    with pytest.raises(ValueError):
        obj.evaluate(np.zeros(3))
    with pytest.raises(ValueError):
        obj.evaluate(np.array([10.5, 0.0]))
    with pytest.raises(ValueError):
        obj.evaluate(np.zeros(2), changed_block=2)
    # a float-noise overshoot of the bound is tolerated
    v = obj.evaluate(np.array([10.0 + 1e-9, 0.0]))
    assert v == pytest.approx(-12.0, abs=1e-6)


def test_reset_clears_cache_and_counters():
    obj = subspace_trap(2, 1)
    obj.evaluate(np.array([1.0, 2.0]))
    obj.reset()
    assert obj.counters.full_evals == 0
    assert obj.counters.sigma_calls == [0, 0]
    obj.evaluate(np.array([1.0, 2.0]))
    # both sigmas recomputed after the reset
    assert obj.counters.sigma_calls == [1, 1]


def test_external_cache_is_isolated_until_adopted():
    obj = subspace_trap(2, 1)
    x = np.array([1.0, 2.0])
    obj.evaluate(x)
    snap = obj.cache_snapshot()
    y = x.copy()
    y[0] = 7.0
    obj.evaluate(y, changed_block=0, cache=snap)
    assert obj.counters.sigma_calls == [2, 1]
    # the shared cache still holds x's entry for block 0
    obj.evaluate(x, changed_block=0)
    assert obj.counters.sigma_calls == [2, 1]
    # adopting the snapshot entry makes y's block value shared
    obj.adopt_block_entry(0, snap)
    obj.evaluate(y, changed_block=0)
    assert obj.counters.sigma_calls == [2, 1]


def test_concurrent_snapshot_evaluations_keep_counters_exact():
    obj = subspace_trap(2, 1)
    base = np.array([0.5, -0.5])
    obj.evaluate(base)
    rng = np.random.default_rng(3)
    points = [base.copy() for _ in range(40)]
    for i, p in enumerate(points):
        p[0] = rng.uniform(-10, 10)

    def work(p):
        return obj.evaluate(p, changed_block=0, cache=obj.cache_snapshot())

    with concurrent.futures.ThreadPoolExecutor(max_workers=4) as pool:
        values = list(pool.map(work, points))
    assert len(values) == 40
    assert obj.counters.full_evals == 41
    assert obj.counters.sigma_calls[1] == 1


def test_counters_copy_is_independent():
    c = EvalCounters(2, 2, [1, 1])
    d = c.copy()
    d.full_evals += 1
    d.sigma_calls[0] += 1
    assert c.full_evals == 2
    assert c.sigma_calls == [1, 1]
    assert d.total_sigma_calls == 3


def test_constructor_validation():
    blocks = BlockStructure.uniform(2, 1)
    with pytest.raises(ValueError):
        DecomposedObjective(
            name="mismatch",
            sigma=lambda m, a: a[0],
            fuse=lambda obs: 0.0,
            blocks=blocks,
            domain=BoxDomain.cube(0.0, 1.0, 3),
        )
    with pytest.raises(ValueError):
        pyramid_peak(0)
    with pytest.raises(ValueError):
        subspace_trap(1)
    with pytest.raises(ValueError):
        subspace_trap(2, 0)


def test_symmetry_metadata():
    for obj, blocks in ((pyramid_peak(3), 3), (subspace_trap(4, 2), 4)):
        assert obj.symmetry is not None
        assert obj.symmetry.block_count == blocks
        assert obj.blocks.block_count == blocks
