"""Surrogate-driven global optimizer with block coordinate ascent.

The main mode alternates a beta cycle of full-domain exclusion searches with
inner block-coordinate sweeps over the surrogate; every true-objective value
feeds back into the interpolant (together with its symmetric closure when a
group is configured).  The outer loop runs until the full-domain maximin
radius drops to delta0 or the evaluation budget is spent.

Modes:
    rbf-bca            full algorithm (default)
    rbf-global         beta cycle only, no inner sweeps
    greedy-coordinate  golden-section coordinate search on the true objective
    random             uniform sampling baseline
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .domain import BlockStructure, BoxDomain
from .objectives import DecomposedObjective
from .search import InfeasibleSearchError, SearchOutcome, SearchSpace, compute_delta, search_next
from .seeds import SeedStream
from .surrogate import (
    DEFAULT_MAX_ORBIT,
    EvaluationPoint,
    RbfSurrogate,
    SymmetryGroup,
    fit,
    symmetric_closure,
    update,
)

logger = logging.getLogger(__name__)

MODES = ("rbf-bca", "rbf-global", "greedy-coordinate", "random")

# One surrogate-mode cycle visits these exclusion fractions in order.
DEFAULT_BETA_CYCLE = (0.98, 0.6, 0.75, 0.2, 0.01)

TERMINATION_REASONS = ("delta-reached", "budget-exhausted", "infeasible-search", "stationary")


@dataclass(frozen=True)
class SolverConfig:
    mode: str = "rbf-bca"
    beta_cycle: tuple[float, ...] = DEFAULT_BETA_CYCLE
    delta0: float = 5.0
    max_evals: int = 2000
    seed: int = 0
    parallel_sweep: bool = False
    threads: int = 1
    stationarity_tol: float = 1e-6
    max_inner_sweeps: int | None = None  # None = 10 * block count
    simplex_scale: float = 0.05
    symmetric_closure: bool = True
    max_orbit: int = DEFAULT_MAX_ORBIT

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if not self.beta_cycle or any(not 0.0 <= b < 1.0 for b in self.beta_cycle):
            raise ValueError("beta_cycle entries must lie in [0, 1)")
        if self.delta0 <= 0:
            raise ValueError("delta0 must be positive")
        if self.max_evals < 1:
            raise ValueError("max_evals must be positive")
        if self.threads < 1:
            raise ValueError("threads must be positive")
        if self.max_inner_sweeps is not None and self.max_inner_sweeps < 1:
            raise ValueError("max_inner_sweeps must be positive")
        if not 0 < self.simplex_scale < 1:
            raise ValueError("simplex_scale must lie in (0, 1)")


@dataclass(frozen=True)
class HistoryEntry:
    index: int                 # 1-based true-evaluation counter
    point: np.ndarray
    value: float
    delta: float               # most recent full-domain maximin estimate
    phase: str
    min_distance: float = math.nan   # distance to nearest previous point at selection
    threshold: float = math.nan      # beta_effective * delta enforced at selection


@dataclass(frozen=True)
class SolverResult:
    best_point: np.ndarray
    best_value: float
    history: tuple[HistoryEntry, ...]
    termination_reason: str
    sequential_rounds: int
    delta_final: float
    counters: "object" = None

    @property
    def evaluations(self) -> int:
        return len(self.history)


@dataclass(frozen=True)
class SweepResult:
    block_optima: tuple[np.ndarray, ...]
    recombined: np.ndarray
    evaluations: int
    complete: bool


def initialize(domain: BoxDomain, x0: np.ndarray, config: SolverConfig) -> list[np.ndarray]:
    """Simplex seed: x0 plus one offset per coordinate, clamped to the box.

    An offset that clamping collapses back onto x0 flips its sign, so the
    seeds always span the domain dimension.
    """
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (domain.dimension,):
        raise ValueError("x0 length must match the domain")
    if not domain.contains(x0):
        raise ValueError(f"start point {x0} lies outside the domain")
    tol = 1e-8 * domain.diameter
    points = [x0.copy()]
    for i in range(domain.dimension):
        off = config.simplex_scale * (domain.upper[i] - domain.lower[i])
        cand = x0.copy()
        cand[i] += off
        cand = domain.clip(cand)
        if np.linalg.norm(cand - x0) < tol:
            cand = x0.copy()
            cand[i] -= off
            cand = domain.clip(cand)
        points.append(cand)
    return points


def is_stationary(
    base_point: np.ndarray,
    block_optima: "tuple[np.ndarray, ...] | list[np.ndarray]",
    blocks: BlockStructure,
    domain: BoxDomain,
    tol: float,
) -> bool:
    """True when every block optimum stayed within tol * diameter of the base."""
    limit = tol * domain.diameter
    base = np.asarray(base_point, dtype=float)
    for m, t in enumerate(block_optima):
        sl = blocks.block_slice(m)
        if float(np.linalg.norm(np.asarray(t)[sl] - base[sl])) > limit:
            return False
    return True


class _BudgetExhausted(Exception):
    pass


class _Driver:
    def __init__(
        self,
        objective: DecomposedObjective,
        x0: np.ndarray,
        config: SolverConfig,
        domain: BoxDomain,
        blocks: BlockStructure,
        group: SymmetryGroup | None,
    ):
        self.obj = objective
        self.cfg = config
        self.domain = domain
        self.blocks = blocks
        self.group = group if config.symmetric_closure else None
        self.x0 = np.asarray(x0, dtype=float)
        self.seeds = SeedStream(config.seed)
        self.dup_tol = 1e-8 * domain.diameter
        self.surrogate: RbfSurrogate | None = None
        self.history: list[HistoryEntry] = []
        self.rounds = 0
        self.last_delta = math.nan
        self.infeasible_events = 0
        self.pool: ThreadPoolExecutor | None = None

    # -- plumbing ------------------------------------------------------------

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seeds.next())

    @property
    def evals(self) -> int:
        return len(self.history)

    @property
    def centers(self) -> np.ndarray:
        assert self.surrogate is not None
        return self.surrogate.centers

    def evaluate(
        self,
        x: np.ndarray,
        phase: str,
        changed_block: int | None = None,
        cache: "list | None" = None,
        outcome: SearchOutcome | None = None,
        count_round: bool = True,
    ) -> float:
        """One true-objective call: budget check, history entry, round count."""
        if self.evals >= self.cfg.max_evals:
            raise _BudgetExhausted()
        value = self.obj.evaluate(x, changed_block, cache=cache)
        self.history.append(
            HistoryEntry(
                index=self.evals + 1,
                point=np.array(x, dtype=float),
                value=value,
                delta=self.last_delta,
                phase=phase,
                min_distance=outcome.min_distance if outcome else math.nan,
                threshold=(outcome.beta_effective * outcome.delta) if outcome else math.nan,
            )
        )
        if count_round:
            self.rounds += 1
        return value

    def absorb(self, x: np.ndarray, value: float) -> None:
        """Feed an evaluated point (plus closure) into the surrogate."""
        point = EvaluationPoint(x, value)
        assert self.surrogate is not None
        res = update(
            self.surrogate,
            point,
            self.blocks if self.group is not None else None,
            self.group,
            duplicate_tol=self.dup_tol,
            max_orbit=self.cfg.max_orbit,
            rng=self.rng(),
        )
        self.surrogate = res.surrogate

    def best_pair(self) -> tuple[np.ndarray, float]:
        if self.surrogate is not None:
            k = int(np.argmax(self.surrogate.values))
            return self.surrogate.centers[k].copy(), float(self.surrogate.values[k])
        best = max(self.history, key=lambda h: h.value)
        return best.point.copy(), best.value

    def result(self, reason: str) -> SolverResult:
        if math.isnan(self.last_delta) and self.history:
            pts = np.array([h.point for h in self.history])
            self.last_delta = compute_delta(SearchSpace.full(self.domain), pts, self.rng())
        point, value = self.best_pair()
        return SolverResult(
            best_point=point,
            best_value=value,
            history=tuple(self.history),
            termination_reason=reason,
            sequential_rounds=self.rounds,
            delta_final=self.last_delta,
            counters=self.obj.counters.copy(),
        )

    # -- surrogate modes -----------------------------------------------------

    def run(self) -> SolverResult:
        try:
            if self.cfg.mode in ("rbf-bca", "rbf-global"):
                if self.cfg.parallel_sweep and self.cfg.threads > 1:
                    self.pool = ThreadPoolExecutor(max_workers=self.cfg.threads)
                try:
                    return self.run_surrogate()
                finally:
                    if self.pool is not None:
                        self.pool.shutdown(wait=True)
            if self.cfg.mode == "greedy-coordinate":
                return self.run_greedy()
            return self.run_random()
        except _BudgetExhausted:
            return self.result("budget-exhausted")

    def seed_surrogate(self) -> None:
        seeds = initialize(self.domain, self.x0, self.cfg)
        evaluated = [
            EvaluationPoint(p, self.evaluate(p, "init")) for p in seeds
        ]
        points: list[EvaluationPoint] = []
        if self.group is not None:
            seen: list[np.ndarray] = []
            for ep in evaluated:
                for img in symmetric_closure(
                    ep.point, self.blocks, self.group,
                    max_orbit=self.cfg.max_orbit, rng=self.rng(),
                ):
                    against = np.array(seen) if seen else None
                    if against is not None and float(
                        np.min(np.linalg.norm(against - img, axis=1))
                    ) < self.dup_tol:
                        continue
                    seen.append(img)
                    points.append(EvaluationPoint(img, ep.value))
        else:
            points = evaluated
        self.surrogate = fit(points, duplicate_tol=self.dup_tol)

    def run_surrogate(self) -> SolverResult:
        self.seed_surrogate()
        full = SearchSpace.full(self.domain)
        while True:
            self.last_delta = compute_delta(full, self.centers, self.rng())
            if self.last_delta <= self.cfg.delta0:
                return self.result("delta-reached")
            made_progress = False
            for beta in self.cfg.beta_cycle:
                try:
                    out = search_next(full, self.surrogate, self.centers, beta, self.rng())
                except InfeasibleSearchError as exc:
                    self.infeasible_events += 1
                    logger.debug("full-domain search infeasible at beta=%g: %s", beta, exc)
                    continue
                self.last_delta = out.delta
                # the search just measured the full-domain maximin for free;
                # stop mid-cycle once the density target is met
                if out.delta <= self.cfg.delta0:
                    return self.result("delta-reached")
                value = self.evaluate(out.point, "global-search", outcome=out)
                self.absorb(out.point, value)
                made_progress = True
                if self.cfg.mode == "rbf-bca":
                    self.bca_inner(out.point, beta)
            if not made_progress:
                return self.result("infeasible-search")

    def bca_inner(self, base: np.ndarray, beta: float) -> None:
        limit = self.cfg.max_inner_sweeps or 10 * self.blocks.block_count
        for _ in range(limit):
            try:
                sweep = self.sweep(base, beta)
            except InfeasibleSearchError:
                self.infeasible_events += 1
                return
            if not sweep.complete:
                raise _BudgetExhausted()
            stationary = is_stationary(
                base, sweep.block_optima, self.blocks, self.domain, self.cfg.stationarity_tol
            )
            base = sweep.recombined
            if stationary:
                return

    def sweep(self, base: np.ndarray, beta: float) -> SweepResult:
        if self.cfg.parallel_sweep:
            return self.sweep_parallel(base, beta)
        return self.sweep_serial(base, beta)

    def sweep_serial(self, base: np.ndarray, beta: float) -> SweepResult:
        M = self.blocks.block_count
        cur = np.array(base, dtype=float)
        optima: list[np.ndarray] = []
        evals = 0
        for m in range(M):
            space = SearchSpace.subspace(self.domain, self.blocks, m, cur)
            out = search_next(space, self.surrogate, self.centers, beta, self.rng())
            value = self.evaluate(out.point, "subspace-search", changed_block=m, outcome=out)
            evals += 1
            self.absorb(out.point, value)
            optima.append(out.point)
            cur = out.point
        recombined = np.array(base, dtype=float)
        for m in range(M):
            sl = self.blocks.block_slice(m)
            recombined[sl] = optima[m][sl]
        value = self.evaluate(recombined, "recombine")
        evals += 1
        self.absorb(recombined, value)
        return SweepResult(tuple(optima), recombined, evals, True)

    def sweep_parallel(self, base: np.ndarray, beta: float) -> SweepResult:
        """All block searches run against the pre-sweep surrogate and base;
        results are evaluated and merged in block order, so the outcome is
        identical for any thread count."""
        M = self.blocks.block_count
        base = np.array(base, dtype=float)
        rngs = [self.rng() for _ in range(M)]  # drawn in block order

        def do_search(m: int) -> SearchOutcome:
            space = SearchSpace.subspace(self.domain, self.blocks, m, base)
            return search_next(space, self.surrogate, self.centers, beta, rngs[m])

        if self.pool is not None:
            outs = list(self.pool.map(do_search, range(M)))
        else:
            outs = [do_search(m) for m in range(M)]

        budget_left = self.cfg.max_evals - self.evals
        count = min(M, budget_left)
        snapshots = [self.obj.cache_snapshot() for _ in range(M)]
        values: list[float] = []
        for m in range(count):
            values.append(
                self.evaluate(
                    outs[m].point, "subspace-search",
                    changed_block=m, cache=snapshots[m], outcome=outs[m], count_round=False,
                )
            )
        if count:
            self.rounds += math.ceil(count / self.cfg.threads)
        for m in range(count):
            self.absorb(outs[m].point, values[m])
            self.obj.adopt_block_entry(m, snapshots[m])
        if count < M:
            return SweepResult(tuple(o.point for o in outs[:count]), base, count, False)

        recombined = np.array(base, dtype=float)
        for m in range(M):
            sl = self.blocks.block_slice(m)
            recombined[sl] = outs[m].point[sl]
        value = self.evaluate(recombined, "recombine")
        self.absorb(recombined, value)
        return SweepResult(tuple(o.point for o in outs), recombined, count + 1, True)

    # -- baselines -----------------------------------------------------------

    def run_greedy(self) -> SolverResult:
        """Golden-section coordinate search on the true objective, cycling over
        blocks until a full cycle moves nothing; never restarted."""
        invphi = (math.sqrt(5.0) - 1.0) / 2.0
        x = np.array(self.x0, dtype=float)
        self.evaluate(x, "init")
        fx = self.history[-1].value
        limit = self.cfg.stationarity_tol * self.domain.diameter
        while True:
            moved = 0.0
            for m in range(self.blocks.block_count):
                for j in range(*self.blocks.spans[m]):
                    a, b = float(self.domain.lower[j]), float(self.domain.upper[j])
                    tol = max(1e-6 * (b - a), 1e-12)
                    # probes run against a cache snapshot so a rejected final
                    # candidate leaves the shared view at the incumbent
                    snap = self.obj.cache_snapshot()

                    def probe(v: float) -> float:
                        cand = x.copy()
                        cand[j] = v
                        return self.evaluate(cand, "line-search", changed_block=m, cache=snap)

                    c = b - invphi * (b - a)
                    d = a + invphi * (b - a)
                    fc, fd = probe(c), probe(d)
                    while b - a > tol:
                        if fc > fd:
                            b, d, fd = d, c, fc
                            c = b - invphi * (b - a)
                            fc = probe(c)
                        else:
                            a, c, fc = c, d, fd
                            d = a + invphi * (b - a)
                            fd = probe(d)
                    new = 0.5 * (a + b)
                    fnew = probe(new)
                    if fnew >= fx:
                        moved = max(moved, abs(new - x[j]))
                        x = x.copy()
                        x[j] = new
                        fx = fnew
                        self.obj.adopt_block_entry(m, snap)
            if moved <= limit:
                return self.result("stationary")

    def run_random(self) -> SolverResult:
        """Uniform sampling; spends the whole budget."""
        rng = self.rng()
        self.evaluate(self.x0, "random")
        while self.evals < self.cfg.max_evals:
            x = self.domain.sample(rng, 1)[0]
            self.evaluate(x, "random")
        return self.result("budget-exhausted")


def solve(
    objective: DecomposedObjective,
    x0: np.ndarray,
    config: SolverConfig,
    *,
    domain: BoxDomain | None = None,
    blocks: BlockStructure | None = None,
    group: SymmetryGroup | None = None,
) -> SolverResult:
    """Maximize the objective from x0 under the given configuration.

    domain, blocks, and group default to the objective's own; pass group=None
    with config.symmetric_closure=False to disable closure entirely.
    """
    domain = domain if domain is not None else objective.domain
    blocks = blocks if blocks is not None else objective.blocks
    group = group if group is not None else objective.symmetry
    if config.max_evals < domain.dimension + 2 and config.mode in ("rbf-bca", "rbf-global"):
        raise ValueError("surrogate modes need max_evals >= dimension + 2")
    if group is not None and config.symmetric_closure:
        _validate_group_bounds(group, blocks, domain)
    driver = _Driver(objective, x0, config, domain, blocks, group)
    return driver.run()


def _validate_group_bounds(
    group: SymmetryGroup, blocks: BlockStructure, domain: BoxDomain
) -> None:
    """Permutations may only map blocks onto blocks with identical bounds."""
    for p in group.block_permutations:
        for m, src in enumerate(p):
            a, b = blocks.spans[m]
            c, d = blocks.spans[src]
            if b - a != d - c or not (
                np.array_equal(domain.lower[a:b], domain.lower[c:d])
                and np.array_equal(domain.upper[a:b], domain.upper[c:d])
            ):
                raise ValueError(
                    f"permutation maps block {src} onto block {m} with different bounds"
                )
