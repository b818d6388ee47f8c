"""``sim`` command line: run scenarios, replay manifests, list scenarios."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .evolution import ConfigError
from .experiments import DESCRIPTIONS, SCENARIOS, ScenarioSpec, run_scenario
from .results import emit_results, replay


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sim", description="Hawk-dove hierarchy simulations.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario and write results.csv + manifest.json")
    run.add_argument("scenario", choices=SCENARIOS)
    run.add_argument("--config", type=Path, help="JSON file with base/grid/iterations/seed overrides")
    run.add_argument("--preset", choices=("paper", "desk"), default="desk")
    run.add_argument("--seed", type=int)
    run.add_argument("--iterations", type=int)
    run.add_argument("--out", type=Path)
    run.add_argument("--workers", type=int, default=1)

    rep = sub.add_parser("replay", help="re-run a manifest and rewrite its outputs")
    rep.add_argument("manifest", type=Path)
    rep.add_argument("--out", type=Path, help="write here instead of next to the manifest")
    rep.add_argument("--workers", type=int, default=1)

    sub.add_parser("list-scenarios", help="print the available scenarios")
    return parser


def _spec_from_args(args) -> ScenarioSpec:
    spec = ScenarioSpec.from_preset(args.scenario, args.preset)
    if args.config is not None:
        with open(args.config, encoding="utf-8") as fh:
            spec = spec.merged(json.load(fh))
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.iterations is not None:
        overrides["iterations"] = args.iterations
    if overrides:
        spec = spec.merged(overrides)
    return spec


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "list-scenarios":
            for name in SCENARIOS:
                print(f"{name:26s} {DESCRIPTIONS[name]}")
            return 0
        if args.command == "replay":
            results, manifest = replay(args.manifest, args.out, workers=args.workers)
        else:
            spec = _spec_from_args(args)
            out = args.out or Path(spec.out or Path("runs") / spec.scenario)
            # validate before touching the filesystem
            spec.validate()
            table = run_scenario(spec, workers=args.workers)
            results, manifest = emit_results(table, out)
    except (ConfigError, OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"sim: error: {exc}", file=sys.stderr)
        return 2
    print(results)
    print(manifest)
    return 0


if __name__ == "__main__":
    sys.exit(main())
