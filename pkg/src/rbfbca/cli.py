"""Command line interface.

Subcommands:
  bench  run a benchmark campaign from a JSON config and write CSVs + figure
  place  optimize a camera placement for a scenario file and write the SVG map
  demo   materialize the bundled scenarios and run a short placement
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .campaign import (
    CampaignConfig,
    run_campaign,
    run_placement,
    write_report_files,
)
from .scenario import BUNDLED_SCENES, ScenarioParseError
from .solver import MODES


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rbfbca",
        description="surrogate-guided block coordinate ascent for expensive box-bounded maximization",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("bench", help="run a benchmark campaign from a JSON config")
    bench.add_argument("--config", required=True, help="campaign config (JSON)")
    bench.add_argument("--out", default="bench-out", help="output directory for CSVs and figure")
    bench.add_argument("--mode", choices=MODES, action="append", dest="modes",
                       help="restrict to this mode (repeatable)")
    bench.add_argument("--seed", type=int, default=None, help="override the master seed")
    bench.add_argument("--max-evals", type=int, default=None, help="override the per-run budget")
    bench.add_argument("--threads", type=int, default=1, help="worker threads across runs")

    place = sub.add_parser("place", help="optimize a placement for a scenario")
    place.add_argument("--scenario", required=True,
                       help=f"scenario file path or bundled name {sorted(BUNDLED_SCENES)}")
    place.add_argument("--out", default="place-out", help="output directory for the SVG map")
    place.add_argument("--mode", choices=MODES, default="rbf-bca")
    place.add_argument("--seed", type=int, default=0)
    place.add_argument("--max-evals", type=int, default=50)
    place.add_argument("--threads", type=int, default=1,
                       help="worker threads for parallel block sweeps")

    demo = sub.add_parser("demo", help="write the bundled scenarios and run a short placement")
    demo.add_argument("--out", default="demo-out", help="output directory")
    demo.add_argument("--seed", type=int, default=0)
    demo.add_argument("--max-evals", type=int, default=30)
    return parser


def _cmd_bench(args: argparse.Namespace) -> int:
    config = CampaignConfig.from_json(args.config)
    updates = {}
    if args.modes:
        updates["modes"] = tuple(dict.fromkeys(args.modes))
    if args.seed is not None:
        updates["master_seed"] = args.seed
    if args.max_evals is not None:
        updates["solver"] = {**config.solver, "max_evals": args.max_evals}
    if updates:
        config = dataclasses.replace(config, **updates)
    report = run_campaign(config, threads=args.threads)
    paths = write_report_files(report, Path(args.out))
    for group in report.groups:
        mean = group.stats["deviation_mean"]
        shown = ("deviation_mean", mean) if mean is not None else \
            ("best_value_mean", group.stats["best_value_mean"])
        print(f"{group.mode}: runs={group.runs} {shown[0]}={shown[1]:.6g} "
              f"evals_mean={group.stats['evals_mean']:.1f}")
    for p in paths:
        print(f"wrote {p}")
    return 0


def _cmd_place(args: argparse.Namespace) -> int:
    outcome = run_placement(
        args.scenario,
        args.out,
        mode=args.mode,
        seed=args.seed,
        max_evals=args.max_evals,
        threads=args.threads,
        parallel_sweep=args.threads > 1,
    )
    result = outcome.result
    print(f"coverage {100.0 * outcome.coverage:.1f}% "
          f"({result.evaluations} evals, {result.sequential_rounds} rounds, "
          f"stopped: {result.termination_reason})")
    placement = [round(float(v), 3) for v in result.best_point]
    print(f"placement {json.dumps(placement)}")
    if outcome.svg_path is not None:
        print(f"wrote {outcome.svg_path}")
    return 0


def _cmd_demo(args: argparse.Namespace) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in sorted(BUNDLED_SCENES.items()):
        path = out / f"{name}.scene"
        path.write_text(text, encoding="utf-8")
        print(f"wrote {path}")
    outcome = run_placement(
        "two-obstacle-room", out, seed=args.seed, max_evals=args.max_evals
    )
    print(f"two-obstacle-room coverage {100.0 * outcome.coverage:.1f}% "
          f"after {outcome.result.evaluations} evals")
    print(f"wrote {outcome.svg_path}")
    return 0


def main(argv: "list[str] | None" = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"bench": _cmd_bench, "place": _cmd_place, "demo": _cmd_demo}
    try:
        return handlers[args.command](args)
    except (ScenarioParseError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
