"""Intersection of everyone's private reference sets, Monte Carlo vs closed form.

    python scripts/overlap.py --n 10 --draws 100000
"""

import argparse

import numpy as np

from refti.experiments import overlap_check, overlap_closed_form


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=10)
    ap.add_argument("--draws", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    for w in range(max(2, args.n - 3), args.n + 1):
        mean, se = overlap_check(args.n, w, args.draws, rng)
        print(f"w={w:3d}  monte carlo {mean:.4f} +/- {se:.4f}   closed form {overlap_closed_form(args.n, w):.4f}")


if __name__ == "__main__":
    main()
