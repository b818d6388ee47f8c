"""Hierarchy consensus (CI, CI1) and genome-frequency statistics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Sequence

import numpy as np

from .game import GameParams, Tactic
from .inference import CANONICAL_ROSTER, StrategyGenome, decide


@dataclass(frozen=True)
class CiSnapshot:
    contest_index: int
    ci: float
    ci1: float

    @classmethod
    def from_ci1(cls, ci1: float, contest_index: int = 0) -> "CiSnapshot":
        ci = 0.5 * (1.0 - ci1)
        # rebuild ci1 from ci so that ci1 == 1 - ci / 0.5 holds exactly
        return cls(contest_index, ci, 1.0 - ci / 0.5)


def _hawk_probability(tactic: Optional[Tactic], p_hawk: float) -> float:
    if tactic is Tactic.HAWK:
        return 1.0
    if tactic is Tactic.DOVE:
        return 0.0
    return p_hawk


def consistency_index(pop, params: GameParams, contest_index: int = 0) -> CiSnapshot:
    """Expected share of pairs that would play complementary tactics.

    Each player's tactic toward the other comes from its inference cascade;
    where that falls through to the mixed ESS the hawk probability is used
    instead of a draw.  CI1 is the mean over all unordered pairs of
    P(one hawk, one dove), and ``CI = (1 - CI1) / 2``.  Read-only.
    """
    n = pop.n
    p = params.hawk_probability
    comp = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            hi = _hawk_probability(decide(pop.genomes[i], pop.memories[i], i, j, pop.refs[i]), p)
            hj = _hawk_probability(decide(pop.genomes[j], pop.memories[j], j, i, pop.refs[j]), p)
            comp += hi * (1.0 - hj) + (1.0 - hi) * hj
    return CiSnapshot.from_ci1(comp / (n * (n - 1) / 2.0), contest_index)


def frequency_vector(
    genomes: Sequence[StrategyGenome], roster: Sequence[StrategyGenome] = CANONICAL_ROSTER
) -> Dict[StrategyGenome, float]:
    """Genome frequencies; every roster genome is reported, zeros included."""
    n = len(genomes)
    out = {g: 0.0 for g in roster}
    for genome in genomes:
        out[genome] = out.get(genome, 0.0) + 1.0
    return {g: c / n for g, c in sorted(out.items())}


@dataclass(frozen=True)
class Dominance:
    genome: StrategyGenome
    frequency: float
    dominant: bool
    tie: bool


def dominant_genome(final, threshold: float = 0.9) -> Dominance:
    """Most frequent genome at the end of a run.

    ``final`` is a genome-to-frequency mapping or a finished
    ``SimulationResult``.  Ties go to the earliest genome in canonical
    order and are flagged.
    """
    if hasattr(final, "final_frequencies"):
        final = final.final_frequencies()
    if not final:
        raise ValueError("empty frequency mapping")
    top = max(final.values())
    leaders = sorted(g for g, f in final.items() if f == top)
    return Dominance(leaders[0], float(top), bool(top >= threshold), len(leaders) > 1)


def mean_and_se(values) -> tuple:
    values = np.asarray(values, dtype=np.float64)
    if values.size < 2:
        return float(values.mean()) if values.size else float("nan"), float("nan")
    return float(values.mean()), float(values.std(ddof=1) / np.sqrt(values.size))
