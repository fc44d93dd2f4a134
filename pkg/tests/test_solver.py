import numpy as np
import pytest

from rbfbca.domain import BlockStructure, BoxDomain
from rbfbca.objectives import (
    DecomposedObjective,
    pyramid_peak,
    quantized_bowl,
    subspace_trap,
)
from rbfbca.solver import (
    DEFAULT_BETA_CYCLE,
    MODES,
    TERMINATION_REASONS,
    SolverConfig,
    initialize,
    is_stationary,
    solve,
)
from rbfbca.surrogate import full_symmetric_group


def affine_objective(slopes, const=0.0, lo=0.0, hi=10.0):
    """Separable affine test objective with single-coordinate blocks."""
    slopes = np.asarray(slopes, dtype=float)
    n = slopes.size
    return DecomposedObjective(
        name="affine",
        sigma=lambda m, a: float(a[0]),
        fuse=lambda obs: const + float(np.dot(slopes, np.asarray(obs))),
        blocks=BlockStructure.uniform(n, 1),
        domain=BoxDomain.cube(lo, hi, n),
        known_max=const + float(np.sum(np.where(slopes > 0, slopes * hi, slopes * lo))),
    )


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(mode="annealing")
    with pytest.raises(ValueError):
        SolverConfig(beta_cycle=(0.5, 1.0))
    with pytest.raises(ValueError):
        SolverConfig(delta0=0.0)
    with pytest.raises(ValueError):
        SolverConfig(max_evals=0)
    with pytest.raises(ValueError):
        SolverConfig(threads=0)
    cfg = SolverConfig()
    assert cfg.mode == "rbf-bca"
    assert cfg.beta_cycle == DEFAULT_BETA_CYCLE
    assert set(MODES) >= {"rbf-bca", "rbf-global", "greedy-coordinate", "random"}


def test_initialize_interior_simplex():
    domain = BoxDomain.cube(-10.0, 10.0, 2)
    pts = initialize(domain, np.array([1.0, 2.0]), SolverConfig(simplex_scale=0.05))
    assert len(pts) == 3
    assert np.array_equal(pts[0], [1.0, 2.0])
    # offset is 5% of each coordinate range (here 20), added one axis at a time
    assert np.array_equal(pts[1], [2.0, 2.0])
    assert np.array_equal(pts[2], [1.0, 3.0])


def test_initialize_flips_offsets_at_the_boundary():
    domain = BoxDomain.cube(-10.0, 10.0, 2)
    pts = initialize(domain, np.array([10.0, 9.5]), SolverConfig(simplex_scale=0.05))
    # +1 on coordinate 0 clamps back onto x0, so the offset flips to -1
    assert np.array_equal(pts[1], [9.0, 9.5])
    # +1 on coordinate 1 survives as a half step after clipping
    assert np.array_equal(pts[2], [10.0, 10.0])


def test_initialize_rejects_outside_start():
    domain = BoxDomain.cube(0.0, 1.0, 2)
    with pytest.raises(ValueError):
        initialize(domain, np.array([2.0, 0.5]), SolverConfig())


def test_is_stationary_thresholds():
    domain = BoxDomain.cube(-10.0, 10.0, 2)
    blocks = BlockStructure.uniform(2, 1)
    base = np.zeros(2)
    tol = 1e-6
    d = domain.diameter
    # one block moved by ten times the tolerance: not stationary
    moved = [np.array([10 * tol * d, 0.0]), base.copy()]
    assert not is_stationary(base, moved, blocks, domain, tol)
    # every block within half the tolerance: stationary
    near = [np.array([tol * d / 2, 0.0]), np.array([0.0, tol * d / 2])]
    assert is_stationary(base, near, blocks, domain, tol)


def test_solve_requires_minimal_budget_for_surrogate_modes():
    obj = pyramid_peak(3)
    with pytest.raises(ValueError):
        solve(obj, np.zeros(3), SolverConfig(mode="rbf-bca", max_evals=4))
    # non-surrogate modes accept tiny budgets
    res = solve(pyramid_peak(3), np.zeros(3), SolverConfig(mode="random", max_evals=3, seed=1))
    assert res.evaluations == 3


def test_budget_is_a_hard_cap_in_every_mode():
    for mode in MODES:
        obj = pyramid_peak(2)
        cfg = SolverConfig(mode=mode, max_evals=25, seed=3, delta0=1e-9)
        res = solve(obj, np.array([6.0, 7.5]), cfg)
        assert res.evaluations <= 25
        assert obj.counters.full_evals == res.evaluations
        assert res.termination_reason in TERMINATION_REASONS


def test_best_value_is_history_maximum():
    obj = pyramid_peak(2)
    res = solve(obj, np.array([6.0, 7.5]), SolverConfig(max_evals=40, seed=5))
    values = [h.value for h in res.history]
    assert res.best_value == max(values)
    assert obj.evaluate(res.best_point) == pytest.approx(res.best_value)


def test_generous_delta0_stops_right_after_seeding():
    obj = pyramid_peak(3)
    res = solve(obj, np.zeros(3), SolverConfig(max_evals=100, seed=7, delta0=100.0))
    assert res.termination_reason == "delta-reached"
    # only the simplex seed was evaluated
    assert res.evaluations == 4
    assert res.delta_final <= 100.0


def test_same_seed_reproduces_run_exactly():
    runs = []
    for _ in range(2):
        obj = quantized_bowl(2)
        res = solve(obj, np.array([5.0, 5.0]), SolverConfig(max_evals=35, seed=11))
        runs.append(res)
    a, b = runs
    assert a.evaluations == b.evaluations
    assert all(
        np.array_equal(ha.point, hb.point) and ha.value == hb.value
        for ha, hb in zip(a.history, b.history)
    )
    assert a.best_value == b.best_value


def test_different_seeds_differ():
    best = set()
    for seed in (0, 1, 2):
        obj = quantized_bowl(2)
        res = solve(obj, np.array([5.0, 5.0]), SolverConfig(max_evals=35, seed=seed))
        best.add(tuple(tuple(h.point) for h in res.history))
    assert len(best) == 3


def test_history_records_exclusion_evidence():
    """Search-produced entries carry the feasibility pair they satisfied."""
    obj = quantized_bowl(2)
    res = solve(obj, np.array([5.0, 5.0]), SolverConfig(max_evals=60, seed=13))
    tol = 1e-6 * obj.domain.diameter
    searched = [h for h in res.history if h.phase in ("global-search", "subspace-search")]
    assert searched, "expected search-produced evaluations"
    for h in searched:
        assert np.isfinite(h.min_distance) and np.isfinite(h.threshold)
        assert h.min_distance >= h.threshold - tol
    seeded = [h for h in res.history if h.phase in ("init", "recombine")]
    assert all(np.isnan(h.min_distance) for h in seeded)


def test_affine_objective_is_solved_exactly_after_seeding():
    """Three seed points pin an affine surrogate exactly, so the first
    unconstrained search step already lands on the maximizing corner."""
    obj = affine_objective([1.0, 2.0])
    cfg = SolverConfig(
        mode="rbf-bca", max_evals=12, seed=17, delta0=1e-9,
        beta_cycle=(0.0,), max_inner_sweeps=1, symmetric_closure=False,
    )
    res = solve(obj, np.array([5.0, 5.0]), cfg)
    first_search = next(h for h in res.history if h.phase == "global-search")
    assert first_search.point == pytest.approx([10.0, 10.0], abs=1e-6)
    assert res.best_point == pytest.approx([10.0, 10.0], abs=1e-6)
    assert res.best_value == pytest.approx(30.0, abs=1e-5)


def _sweep_groups(history, block_count):
    """Complete serial sweep groups: M consecutive subspace steps plus the
    recombine entry that follows them."""
    groups = []
    i = 0
    while i < len(history):
        if history[i].phase != "subspace-search":
            i += 1
            continue
        j = i
        while j < len(history) and history[j].phase == "subspace-search":
            j += 1
        run = history[i:j]
        if len(run) == block_count and j < len(history) and history[j].phase == "recombine":
            groups.append((run, history[j]))
        i = j
    return groups


def test_serial_sweep_chains_block_results():
    """Each block step starts from the previous step's point (Gauss-Seidel),
    so consecutive entries differ only inside the block just searched, and
    the recombined point coincides with the final step bit for bit."""
    obj = pyramid_peak(3)
    blocks = obj.blocks
    res = solve(obj, np.array([6.0, 7.5, 4.0]), SolverConfig(max_evals=60, seed=43))
    groups = _sweep_groups(res.history, blocks.block_count)
    assert groups, "expected at least one complete sweep"
    for run, rec in groups:
        for m in range(1, len(run)):
            outside = np.ones(3, dtype=bool)
            outside[blocks.block_slice(m)] = False
            assert np.array_equal(run[m].point[outside], run[m - 1].point[outside])
        assert np.array_equal(rec.point, run[-1].point)


def test_recombination_duplicate_costs_budget_but_not_a_sigma():
    """The serial recombined point bit-matches the last block step, so it
    resolves entirely from the block caches."""
    obj = affine_objective([1.0, 2.0])
    cfg = SolverConfig(
        mode="rbf-bca", max_evals=12, seed=17, delta0=1e-9,
        beta_cycle=(0.0,), max_inner_sweeps=1, symmetric_closure=False,
    )
    res = solve(obj, np.array([5.0, 5.0]), cfg)
    rec = [h for h in res.history if h.phase == "recombine"]
    sweep = [h for h in res.history if h.phase == "subspace-search"]
    assert rec and np.array_equal(rec[0].point, sweep[-1].point)
    # every history entry, the recombination included, debits the budget
    assert obj.counters.full_evals == res.evaluations
    # block values were reused rather than recomputed
    assert obj.counters.total_sigma_calls < obj.counters.full_evals * obj.blocks.block_count


def test_greedy_coordinate_stalls_at_trap_diagonal():
    """From (0.5, -0.5) each 1-D slice peaks where the other block sits, so
    coordinate ascent walks to (-0.5, -0.5) and declares stationarity."""
    obj = subspace_trap(2, 1)
    cfg = SolverConfig(mode="greedy-coordinate", max_evals=2000, seed=19)
    res = solve(obj, np.array([0.5, -0.5]), cfg)
    assert res.termination_reason == "stationary"
    assert res.best_point == pytest.approx([-0.5, -0.5], abs=1e-3)
    assert res.best_value == pytest.approx(1.0, abs=1e-3)
    assert res.best_value <= 1.0 + 1e-9


def test_greedy_coordinate_solves_smooth_separable_objective():
    obj = affine_objective([2.0, -3.0])
    cfg = SolverConfig(mode="greedy-coordinate", max_evals=2000, seed=23)
    res = solve(obj, np.array([5.0, 5.0]), cfg)
    assert res.best_point == pytest.approx([10.0, 0.0], abs=1e-4)
    assert res.termination_reason == "stationary"


def test_rbf_bca_escapes_the_subspace_trap():
    obj = subspace_trap(2, 1)
    cfg = SolverConfig(mode="rbf-bca", max_evals=2000, seed=2)
    res = solve(obj, np.array([0.5, -0.5]), cfg)
    # global max is 20 at (10, 10) and (-10, -10); the trap holds values <= 1
    assert res.best_value >= 19.0


def test_parallel_sweep_bit_identical_across_thread_counts():
    results = []
    for threads in (1, 3):
        obj = pyramid_peak(3)
        cfg = SolverConfig(
            mode="rbf-bca", max_evals=40, seed=29,
            parallel_sweep=True, threads=threads,
        )
        results.append(solve(obj, np.array([6.0, 7.5, 4.0]), cfg))
    a, b = results
    assert a.evaluations == b.evaluations
    assert all(
        np.array_equal(ha.point, hb.point) and ha.value == hb.value
        for ha, hb in zip(a.history, b.history)
    )
    assert a.best_value == b.best_value
    # identical trajectory; only the round accounting sees the batching
    assert a.sequential_rounds > b.sequential_rounds


def test_parallel_sweep_reduces_sequential_rounds():
    serial_cfg = SolverConfig(mode="rbf-bca", max_evals=40, seed=29)
    parallel_cfg = SolverConfig(
        mode="rbf-bca", max_evals=40, seed=29, parallel_sweep=True, threads=3
    )
    obj_s = pyramid_peak(3)
    obj_p = pyramid_peak(3)
    x0 = np.array([6.0, 7.5, 4.0])
    rs = solve(obj_s, x0, serial_cfg)
    rp = solve(obj_p, x0, parallel_cfg)
    # serial counts one round per evaluation
    assert rs.sequential_rounds == rs.evaluations
    assert rp.sequential_rounds < rs.sequential_rounds


def test_rbf_global_never_runs_sweeps():
    obj = pyramid_peak(2)
    res = solve(obj, np.array([6.0, 7.5]), SolverConfig(mode="rbf-global", max_evals=30, seed=31))
    phases = {h.phase for h in res.history}
    assert "subspace-search" not in phases
    assert "recombine" not in phases


def test_random_mode_spends_entire_budget():
    obj = pyramid_peak(2)
    res = solve(obj, np.array([6.0, 7.5]), SolverConfig(mode="random", max_evals=50, seed=37))
    assert res.evaluations == 50
    assert res.termination_reason == "budget-exhausted"
    assert all(obj.domain.contains(h.point) for h in res.history)


def test_closure_validation_rejects_asymmetric_bounds():
    blocks = BlockStructure.uniform(2, 1)
    obj = DecomposedObjective(
        name="lopsided",
        sigma=lambda m, a: float(a[0]),
        fuse=lambda obs: -abs(obs[0]) - abs(obs[1]),
        blocks=blocks,
        domain=BoxDomain([0.0, -5.0], [10.0, 5.0]),
        symmetry=full_symmetric_group(2),
    )
    with pytest.raises(ValueError):
        solve(obj, np.array([1.0, 1.0]), SolverConfig(max_evals=20, seed=0))
    # with closure off the same setup is legal
    cfg = SolverConfig(max_evals=10, seed=0, symmetric_closure=False)
    res = solve(obj, np.array([1.0, 1.0]), cfg)
    assert res.evaluations <= 10


def test_counters_travel_with_the_result():
    obj = pyramid_peak(2)
    res = solve(obj, np.array([6.0, 7.5]), SolverConfig(max_evals=30, seed=41))
    assert res.counters.full_evals == res.evaluations
    assert res.counters.fuse_calls == res.evaluations
    # the returned copy is frozen in time even if the objective keeps running
    obj.evaluate(np.array([0.0, 0.0]))
    assert res.counters.full_evals == res.evaluations
