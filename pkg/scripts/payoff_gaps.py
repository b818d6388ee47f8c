"""Payoff of a single mutant relative to the resident it invades.

Plays many single generations of a resident population holding one
mutant and reports the mutant's mean payoff minus the residents' mean,
with its standard error.  Small gaps relative to the mean payoff mean
selection between the two is close to neutral.

    python scripts/payoff_gaps.py --resident TI8-8 --mutants II TI8-0 TI4-4 M
"""

import argparse
from dataclasses import dataclass, field
from typing import List

import numpy as np

from refti.evolution import Population, SimulationConfig, run_generation
from refti.inference import parse_genome
from refti.metrics import mean_and_se


@dataclass
class GapStudy:
    resident: str = "TI8-8"
    mutants: List[str] = field(default_factory=lambda: ["M", "II", "TI8-0", "TI4-4", "TI2-2"])
    n: int = 40
    mc: int = 14
    reps: int = 600
    seed: int = 1


def payoff_gap(study: GapStudy, mutant: str, rng) -> tuple:
    res, mut = parse_genome(study.resident), parse_genome(mutant)
    comp = {res: study.n - 1, mut: 1} if res != mut else {res: study.n}
    config = SimulationConfig(n=study.n, initial_composition=comp, mc=study.mc)
    gaps, means = [], []
    for _ in range(study.reps):
        pop = Population.from_composition(comp, study.mc)
        pay = run_generation(pop, config, rng, keep_memories=False).payoff
        is_mut = np.array([g == mut for g in pop.genomes])
        gaps.append(pay[is_mut].mean() - pay[~is_mut].mean())
        means.append(pay.mean())
    gap, se = mean_and_se(gaps)
    return gap, se, float(np.mean(means))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--resident", default="TI8-8")
    ap.add_argument("--mutants", nargs="+")
    ap.add_argument("--n", type=int, default=40)
    ap.add_argument("--reps", type=int, default=600)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    study = GapStudy(args.resident, n=args.n, reps=args.reps, seed=args.seed)
    if args.mutants:
        study.mutants = args.mutants
    rng = np.random.default_rng(study.seed)
    print(f"resident {study.resident}, N={study.n}, {study.reps} generations per mutant")
    for m in study.mutants:
        gap, se, mean = payoff_gap(study, m, rng)
        print(f"  {m:8s} gap {gap:+8.2f} +/- {se:5.2f}   (mean payoff {mean:.1f})")


if __name__ == "__main__":
    main()
