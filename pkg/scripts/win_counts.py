"""Which strategy takes over: win counts for the evolutionary scenarios.

    python scripts/win_counts.py evolve-fixed-mix
    python scripts/win_counts.py ess-probe --preset desk --workers 4
    python scripts/win_counts.py initial-proportion-sweep --selection deterministic
"""

import argparse
from dataclasses import dataclass
from typing import Optional

from refti.experiments import EVOLUTION_SCENARIOS, ScenarioSpec, run_scenario, values_of


@dataclass
class EvolutionStudy:
    scenario: str = "evolve-fixed-mix"
    preset: str = "desk"
    seed: int = 1
    iterations: Optional[int] = None
    selection: str = "multinomial"
    offset: str = "expected"


def run(study: EvolutionStudy, workers: int = 1):
    config = {"seed": study.seed, "base": {"selection": study.selection, "offset": study.offset}}
    if study.iterations:
        config["iterations"] = study.iterations
    spec = ScenarioSpec.from_preset(study.scenario, study.preset).merged(config)
    return spec, run_scenario(spec, workers=workers)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("scenario", choices=EVOLUTION_SCENARIOS)
    ap.add_argument("--preset", default="desk", choices=("paper", "desk"))
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--iterations", type=int)
    ap.add_argument("--selection", default="multinomial", choices=("multinomial", "deterministic"))
    ap.add_argument("--offset", default="expected", choices=("expected", "realized"))
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    study = EvolutionStudy(args.scenario, args.preset, args.seed, args.iterations, args.selection, args.offset)
    spec, table = run(study, args.workers)
    for cell in spec.cells():
        label = ", ".join(f"{k}={v}" for k, v in cell.items()) or "all runs"
        (conv,) = values_of(table, "converged_share", **cell)
        wins = [r for r in values_of(table, "wins", **cell) if r.value > 0]
        shown = ", ".join(f"{r.genome} {int(r.value)}" for r in wins) or "none"
        print(f"{label}: converged {conv.value:.0%}; wins {shown}")


if __name__ == "__main__":
    main()
