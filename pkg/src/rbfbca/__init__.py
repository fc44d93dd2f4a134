"""Surrogate-guided derivative-free maximization with block coordinate ascent.

The pieces compose bottom-up: a thin-plate-spline interpolant over scattered
observations (`surrogate`), exclusion-aware candidate search on full or
block subspaces (`search`), the solver loop tying them together (`solver`),
decomposed test objectives and a camera-coverage simulator (`objectives`,
`coverage`), and campaign/report tooling behind the `rbfbca` CLI.
"""

__version__ = "0.1.0"

from .domain import BlockStructure, BoxDomain
from .objectives import (
    CacheCoherenceError,
    DecomposedObjective,
    EvalCounters,
    pyramid_peak,
    quantized_bowl,
    subspace_trap,
)
from .surrogate import (
    DegenerateGeometryError,
    EvaluationPoint,
    InsufficientPointsError,
    RbfSurrogate,
    SymmetryGroup,
    fit,
    full_symmetric_group,
    kernel_eval,
    symmetric_closure,
    update,
)
from .search import (
    InfeasibleSearchError,
    SearchOutcome,
    SearchSpace,
    compute_delta,
    search_next,
)
from .solver import SolverConfig, SolverResult, initialize, is_stationary, solve
from .coverage import (
    CameraModel,
    CoverageScene,
    Obstacle,
    corner_constellation,
    coverage_fraction,
    coverage_objective,
    visible_cells,
)
from .scenario import (
    BUNDLED_SCENES,
    ScenarioParseError,
    format_scenario,
    parse_scenario,
    parse_scenario_text,
)
from .campaign import (
    CampaignConfig,
    CampaignReport,
    PlacementOutcome,
    RunRecord,
    run_campaign,
    run_placement,
)
from .seeds import derive_run_seed

__all__ = [
    "BlockStructure",
    "BoxDomain",
    "BUNDLED_SCENES",
    "CacheCoherenceError",
    "CameraModel",
    "CampaignConfig",
    "CampaignReport",
    "CoverageScene",
    "DecomposedObjective",
    "DegenerateGeometryError",
    "EvalCounters",
    "EvaluationPoint",
    "InfeasibleSearchError",
    "InsufficientPointsError",
    "Obstacle",
    "PlacementOutcome",
    "RbfSurrogate",
    "RunRecord",
    "ScenarioParseError",
    "SearchOutcome",
    "SearchSpace",
    "SolverConfig",
    "SolverResult",
    "SymmetryGroup",
    "compute_delta",
    "corner_constellation",
    "coverage_fraction",
    "coverage_objective",
    "derive_run_seed",
    "fit",
    "format_scenario",
    "full_symmetric_group",
    "initialize",
    "is_stationary",
    "kernel_eval",
    "parse_scenario",
    "parse_scenario_text",
    "pyramid_peak",
    "quantized_bowl",
    "run_campaign",
    "run_placement",
    "search_next",
    "solve",
    "subspace_trap",
    "symmetric_closure",
    "update",
    "visible_cells",
]
