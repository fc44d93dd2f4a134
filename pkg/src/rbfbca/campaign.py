"""Benchmark campaigns (groups of seeded runs per mode) and single placements.

A campaign derives one seed per (mode, run_index) from the master seed, draws
the start point from the configured start box with that seed, runs the solver,
and reports per-run rows plus per-group min/mean/max summaries.  Reruns with
the same master seed reproduce the CSV byte for byte except wall-time columns.
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .coverage import corner_constellation, coverage_objective
from .objectives import DecomposedObjective, pyramid_peak, quantized_bowl, subspace_trap
from .scenario import BUNDLED_SCENES, parse_scenario, parse_scenario_text
from .seeds import derive_run_seed
from .solver import MODES, SolverConfig, SolverResult, solve

OBJECTIVES = ("pyramid", "bowl", "trap", "coverage")

RUNS_HEADER = (
    "run_id", "mode", "seed", "n", "best_value", "deviation", "evals",
    "sequential_rounds", "delta_final", "wall_ms", "termination_reason",
)
GROUPS_HEADER = (
    "mode", "runs",
    "best_value_min", "best_value_mean", "best_value_max",
    "deviation_min", "deviation_mean", "deviation_max",
    "evals_min", "evals_mean", "evals_max",
    "sequential_rounds_min", "sequential_rounds_mean", "sequential_rounds_max",
    "delta_final_min", "delta_final_mean", "delta_final_max",
    "wall_ms_mean",
)

# Wall-time columns are excluded from reproducibility comparisons.
TIMING_COLUMNS = ("wall_ms", "wall_ms_mean")


@dataclass(frozen=True)
class CampaignConfig:
    objective: str
    n: int | None = None
    scenario: str | None = None
    trap_block_dim: int = 1
    modes: tuple[str, ...] = ("rbf-bca",)
    runs_per_group: int = 20
    master_seed: int = 0
    start_lower: tuple[float, ...] | None = None
    start_upper: tuple[float, ...] | None = None
    solver: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.objective not in OBJECTIVES:
            raise ValueError(f"unknown objective {self.objective!r}; expected one of {OBJECTIVES}")
        if self.objective == "coverage":
            if not self.scenario:
                raise ValueError("coverage campaigns need a scenario")
        elif self.n is None or self.n < 1:
            raise ValueError(f"objective {self.objective!r} needs a positive dimension n")
        bad = [m for m in self.modes if m not in MODES]
        if bad:
            raise ValueError(f"unknown modes {bad}; expected members of {MODES}")
        if self.runs_per_group < 1:
            raise ValueError("runs_per_group must be positive")
        object.__setattr__(self, "modes", tuple(self.modes))

    @classmethod
    def from_dict(cls, data: dict) -> "CampaignConfig":
        known = {
            "objective", "n", "scenario", "trap_block_dim", "modes", "runs_per_group",
            "master_seed", "start_lower", "start_upper", "solver",
        }
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown campaign config keys: {sorted(unknown)}")
        data = dict(data)
        for key in ("modes", "start_lower", "start_upper"):
            if key in data and data[key] is not None:
                data[key] = tuple(data[key])
        return cls(**data)

    @classmethod
    def from_json(cls, path: "str | Path") -> "CampaignConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def build_objective(config: CampaignConfig) -> DecomposedObjective:
    """Fresh objective instance (own cache and counters) for one run."""
    if config.objective == "pyramid":
        return pyramid_peak(config.n)
    if config.objective == "bowl":
        return quantized_bowl(config.n)
    if config.objective == "trap":
        return subspace_trap(config.n, config.trap_block_dim)
    return coverage_objective(load_scene(config.scenario))


def load_scene(scenario: str):
    """Scenario from a file path or a bundled scene name."""
    if scenario in BUNDLED_SCENES:
        return parse_scenario_text(BUNDLED_SCENES[scenario])
    return parse_scenario(scenario)


def _start_box(config: CampaignConfig, objective: DecomposedObjective) -> tuple[np.ndarray, np.ndarray]:
    if (config.start_lower is None) != (config.start_upper is None):
        raise ValueError("start_lower and start_upper must be given together")
    if config.start_lower is not None:
        lo = np.asarray(config.start_lower, dtype=float)
        hi = np.asarray(config.start_upper, dtype=float)
    elif config.objective == "coverage":
        lo, hi = objective.domain.lower, objective.domain.upper
    else:
        # synthetic default: starts away from the known optimum
        lo = np.full(objective.dimension, 4.0)
        hi = np.full(objective.dimension, 9.0)
    if lo.shape != (objective.dimension,) or hi.shape != (objective.dimension,):
        raise ValueError("start box must match the objective dimension")
    return lo, hi


@dataclass(frozen=True)
class RunRecord:
    run_id: str
    mode: str
    seed: int
    n: int
    best_value: float
    deviation: float | None
    evals: int
    sequential_rounds: int
    delta_final: float
    wall_ms: float
    termination_reason: str


@dataclass(frozen=True)
class GroupSummary:
    mode: str
    runs: int
    stats: dict  # column name -> value, matching GROUPS_HEADER


@dataclass(frozen=True)
class CampaignReport:
    config: CampaignConfig
    records: tuple[RunRecord, ...]
    groups: tuple[GroupSummary, ...]


def run_single(config: CampaignConfig, mode: str, run_index: int) -> RunRecord:
    seed = derive_run_seed(config.master_seed, mode, run_index)
    objective = build_objective(config)
    lo, hi = _start_box(config, objective)
    rng = np.random.default_rng(seed)
    x0 = rng.uniform(lo, hi)
    overrides = dict(config.solver)
    if "beta_cycle" in overrides:
        overrides["beta_cycle"] = tuple(overrides["beta_cycle"])
    solver_config = SolverConfig(mode=mode, seed=seed, **overrides)
    t0 = time.perf_counter()
    result = solve(objective, x0, solver_config)
    wall_ms = (time.perf_counter() - t0) * 1000.0
    deviation = None
    if objective.known_max is not None:
        deviation = objective.known_max - result.best_value
    return RunRecord(
        run_id=f"{mode}-{run_index:03d}",
        mode=mode,
        seed=seed,
        n=objective.dimension,
        best_value=result.best_value,
        deviation=deviation,
        evals=result.evaluations,
        sequential_rounds=result.sequential_rounds,
        delta_final=result.delta_final,
        wall_ms=wall_ms,
        termination_reason=result.termination_reason,
    )


def _summarize(mode: str, rows: list[RunRecord]) -> GroupSummary:
    def mmm(values: list[float]) -> tuple[float, float, float]:
        return min(values), sum(values) / len(values), max(values)

    stats: dict[str, Any] = {}
    for name, values in (
        ("best_value", [r.best_value for r in rows]),
        ("evals", [r.evals for r in rows]),
        ("sequential_rounds", [r.sequential_rounds for r in rows]),
        ("delta_final", [r.delta_final for r in rows]),
    ):
        lo, mean, hi = mmm(values)
        stats[f"{name}_min"], stats[f"{name}_mean"], stats[f"{name}_max"] = lo, mean, hi
    deviations = [r.deviation for r in rows]
    if all(d is not None for d in deviations):
        lo, mean, hi = mmm(deviations)
        stats["deviation_min"], stats["deviation_mean"], stats["deviation_max"] = lo, mean, hi
    else:
        stats["deviation_min"] = stats["deviation_mean"] = stats["deviation_max"] = None
    stats["wall_ms_mean"] = sum(r.wall_ms for r in rows) / len(rows)
    return GroupSummary(mode=mode, runs=len(rows), stats=stats)


def run_campaign(
    config: CampaignConfig,
    out_dir: "str | Path | None" = None,
    threads: int = 1,
) -> CampaignReport:
    """Run all (mode, run_index) pairs and optionally write reports.

    Distinct runs are independent and may execute on up to `threads` workers;
    records are assembled in (mode, run_index) order either way.
    """
    pairs = [(mode, i) for mode in config.modes for i in range(config.runs_per_group)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(lambda p: run_single(config, *p), pairs))
    else:
        records = [run_single(config, mode, i) for mode, i in pairs]
    groups = []
    for mode in config.modes:
        rows = [r for r in records if r.mode == mode]
        groups.append(_summarize(mode, rows))
    report = CampaignReport(config=config, records=tuple(records), groups=tuple(groups))
    if out_dir is not None:
        write_report_files(report, Path(out_dir))
    return report


def _fmt(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return repr(value)
    return str(value)


def _version_line() -> str:
    return f"# rbfbca report v1 (package {__version__})"


def write_runs_csv(report: CampaignReport, path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(_version_line() + "\n")
        writer = csv.writer(fh)
        writer.writerow(RUNS_HEADER)
        for r in report.records:
            writer.writerow([
                r.run_id, r.mode, r.seed, r.n, _fmt(r.best_value), _fmt(r.deviation),
                r.evals, r.sequential_rounds, _fmt(r.delta_final),
                f"{r.wall_ms:.3f}", r.termination_reason,
            ])


def write_groups_csv(report: CampaignReport, path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(_version_line() + "\n")
        writer = csv.writer(fh)
        writer.writerow(GROUPS_HEADER)
        for g in report.groups:
            row = [g.mode, g.runs]
            for col in GROUPS_HEADER[2:]:
                value = g.stats[col]
                row.append(f"{value:.3f}" if col in TIMING_COLUMNS else _fmt(value))
            writer.writerow(row)


def write_report_files(report: CampaignReport, out_dir: Path) -> list[Path]:
    """CSV pair plus the summary figure; returns the paths written."""
    out_dir.mkdir(parents=True, exist_ok=True)
    runs = out_dir / "runs.csv"
    groups = out_dir / "groups.csv"
    write_runs_csv(report, runs)
    write_groups_csv(report, groups)
    from .report import write_campaign_figure

    figure = out_dir / "campaign.png"
    write_campaign_figure(report, figure)
    return [runs, groups, figure]


@dataclass(frozen=True)
class PlacementOutcome:
    result: SolverResult
    coverage: float
    scene: "object"
    svg_path: Path | None


def run_placement(
    scenario: str,
    out_dir: "str | Path | None" = None,
    *,
    mode: str = "rbf-bca",
    seed: int = 0,
    max_evals: int = 50,
    delta0: float = 0.7,
    threads: int = 1,
    parallel_sweep: bool = False,
) -> PlacementOutcome:
    """Optimize a camera placement for a scenario and render the map.

    The run warm-starts at the corner heuristic, so the returned coverage
    never falls below it; the seed drives the solver's search randomness.
    """
    scene = load_scene(scenario)
    objective = coverage_objective(scene)
    x0 = corner_constellation(scene)
    config = SolverConfig(
        mode=mode, seed=seed, max_evals=max_evals, delta0=delta0,
        threads=threads, parallel_sweep=parallel_sweep,
    )
    result = solve(objective, x0, config)
    svg_path = None
    if out_dir is not None:
        from .report import write_placement_svg

        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        svg_path = out / "placement.svg"
        write_placement_svg(scene, result.best_point, svg_path, coverage=result.best_value)
    return PlacementOutcome(
        result=result, coverage=result.best_value, scene=scene, svg_path=svg_path
    )
