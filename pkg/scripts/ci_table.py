"""End-of-generation CI1 per strategy, with standard errors.

    python scripts/ci_table.py --n 16 --mc 14 --iterations 100
    python scripts/ci_table.py --n 15 --unlimited --strategies TI2-2 TI4-4 TI6-6 TI8-8
"""

import argparse
from dataclasses import dataclass, field
from typing import List, Optional

from refti.experiments import ScenarioSpec, run_scenario, values_of


@dataclass
class CiStudy:
    n: int = 16
    mc: Optional[int] = 14
    c: float = 30.0
    iterations: int = 100
    seed: int = 1
    strategies: List[str] = field(default_factory=lambda: ["II", "TI2-2", "TI4-4", "TI6-6", "TI8-8", "TI8-0"])


def run(study: CiStudy, workers: int = 1):
    spec = ScenarioSpec("ci-curve", {"n": study.n, "mc": study.mc, "c": study.c},
                        {"strategy": study.strategies}, study.iterations, study.seed)
    table = run_scenario(spec, workers=workers)
    end = max(r.step for r in table.rows)
    out = []
    for s in study.strategies:
        (mean,) = values_of(table, "mean_ci1", strategy=s, step=end)
        (se,) = values_of(table, "se_ci1", strategy=s, step=end)
        out.append((s, mean.value, se.value))
    return end, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=16)
    ap.add_argument("--mc", type=int, default=14)
    ap.add_argument("--unlimited", action="store_true")
    ap.add_argument("--c", type=float, default=30.0)
    ap.add_argument("--iterations", type=int, default=100)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--strategies", nargs="+")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    study = CiStudy(args.n, None if args.unlimited else args.mc, args.c, args.iterations, args.seed)
    if args.strategies:
        study.strategies = args.strategies
    end, rows = run(study, args.workers)
    print(f"CI1 after {end} contests, N={study.n}, MC={study.mc or 'unlimited'}, C={study.c}")
    for s, m, se in rows:
        print(f"  {s:8s} {m:.4f} +/- {se:.4f}")


if __name__ == "__main__":
    main()
