"""Strategy genomes, reference members and the tactic-selection cascade.

A genome is the pair of heritable loci ``(x, y)``: ``x`` reference members
of which ``y`` are shared by every player carrying the same genome.
``x = 0`` encodes the mixer and ``x = 1`` immediate inference; both carry
``y = 0``.  Any ``x >= 2`` is reference transitive inference ``TI<x>-<y>``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import AbstractSet, Dict, List, Optional, Sequence

import numpy as np

from .game import GameParams, Tactic, mixed_ess_tactic
from .perception import MemoryStore, direct_assessment, pair_assessment, sign_of


class GenomeError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class StrategyGenome:
    x: int
    y: int = 0

    def __post_init__(self):
        if self.x < 0 or self.y < 0:
            raise GenomeError(f"loci must be non-negative, got ({self.x}, {self.y})")
        if self.y > self.x:
            raise GenomeError(f"shared references y={self.y} exceed references x={self.x}")
        if self.x <= 1 and self.y != 0:
            raise GenomeError("mixer and immediate inference carry y = 0")

    @property
    def is_mixer(self) -> bool:
        return self.x == 0

    @property
    def uses_direct(self) -> bool:
        return self.x >= 1

    @property
    def uses_transitive(self) -> bool:
        return self.x >= 2

    @property
    def label(self) -> str:
        return genome_label(self)

    def __str__(self) -> str:
        return self.label


MIXER = StrategyGenome(0, 0)
IMMEDIATE = StrategyGenome(1, 0)

CANONICAL_ROSTER: tuple = (MIXER, IMMEDIATE) + tuple(
    StrategyGenome(x, y) for x in (2, 4, 6, 8) for y in range(0, x + 1, 2)
)

_TI_LABEL = re.compile(r"TI(\d+)-(\d+)")


def genome_label(genome: StrategyGenome) -> str:
    if genome.x == 0:
        return "M"
    if genome.x == 1:
        return "II"
    return f"TI{genome.x}-{genome.y}"


def parse_genome(text: str, n: Optional[int] = None) -> StrategyGenome:
    """Inverse of :func:`genome_label`; with ``n`` also checks ``x <= n``."""
    text = text.strip()
    if text == "M":
        genome = MIXER
    elif text == "II":
        genome = IMMEDIATE
    else:
        match = _TI_LABEL.fullmatch(text)
        if match is None:
            raise GenomeError(f"unknown strategy label {text!r}")
        x, y = int(match.group(1)), int(match.group(2))
        if x < 2:
            raise GenomeError(f"{text!r}: transitive inference needs x >= 2")
        genome = StrategyGenome(x, y)
    if n is not None and genome.x > n:
        raise GenomeError(f"{text!r}: {genome.x} reference members exceed group size {n}")
    return genome


def legal_y_values(x: int) -> List[int]:
    """Shared-reference counts a genome with ``x`` references may mutate into."""
    if x <= 1:
        return [0]
    values = set(range(0, x + 1, 2))
    values.add(x)
    return sorted(values)


def sample_without_replacement(pool: Sequence[int], k: int, rng: np.random.Generator) -> List[int]:
    """Partial Fisher-Yates over ``pool``, one ``rng.random()`` per pick."""
    items = list(pool)
    if k > len(items):
        raise ValueError(f"cannot draw {k} distinct items from {len(items)}")
    for i in range(k):
        j = i + int(rng.random() * (len(items) - i))
        items[i], items[j] = items[j], items[i]
    return items[:k]


def assign_reference_sets(
    genomes: Sequence[StrategyGenome], rng: np.random.Generator
) -> List[frozenset]:
    """Draw every player's reference set for one generation.

    Classes are processed in genome order.  Each TI class first draws its
    shared subset from the whole group, then every member of the class (in
    player order) tops it up with private picks from the players not already
    shared.  Mixer and II players get empty sets.
    """
    n = len(genomes)
    refs: List[frozenset] = [frozenset()] * n
    by_class: Dict[StrategyGenome, List[int]] = {}
    for player, genome in enumerate(genomes):
        if genome.x > n:
            raise GenomeError(f"{genome.label} needs {genome.x} reference members in a group of {n}")
        if genome.uses_transitive:
            by_class.setdefault(genome, []).append(player)
    for genome in sorted(by_class):
        shared = sample_without_replacement(range(n), genome.y, rng)
        shared_set = set(shared)
        rest = [p for p in range(n) if p not in shared_set]
        for player in by_class[genome]:
            private = sample_without_replacement(rest, genome.x - genome.y, rng)
            refs[player] = frozenset(shared) | frozenset(private)
    return refs


def transitive_assessment(
    store: MemoryStore, self_id: int, opponent: int, refs: AbstractSet[int]
) -> int:
    """Rank of ``opponent`` relative to ``self_id`` through common opponents.

    A common opponent is a reference member, other than the two players
    themselves, with at least one remembered contest against each of them.
    Each contributes ``F(R(opponent|co) + R(co|self))``; the result is the
    sign of their mean, or 0 when there is none.
    """
    met_self = set()
    met_opponent = set()
    for record in store:
        if record.winner is None:
            continue
        if record.involves(self_id):
            met_self.add(record.second if record.first == self_id else record.first)
        if record.involves(opponent):
            met_opponent.add(record.second if record.first == opponent else record.first)
    total = 0
    n = 0
    for co in sorted(refs):
        if co == self_id or co == opponent:
            continue
        if co in met_self and co in met_opponent:
            total += sign_of(pair_assessment(store, opponent, co) + pair_assessment(store, co, self_id))
            n += 1
    if n == 0:
        return 0
    # n > 0, so the sign of the mean is the sign of the sum
    return sign_of(total)


def decide(
    genome: StrategyGenome,
    store: MemoryStore,
    self_id: int,
    opponent: int,
    refs: AbstractSet[int],
) -> Optional[Tactic]:
    """Inference steps of the cascade; ``None`` means fall back to the mixed ESS."""
    if genome.uses_direct:
        d = direct_assessment(store, self_id, opponent)
        if d < 0:
            return Tactic.HAWK
        if d > 0:
            return Tactic.DOVE
    if genome.uses_transitive:
        t = transitive_assessment(store, self_id, opponent, refs)
        if t < 0:
            return Tactic.HAWK
        if t > 0:
            return Tactic.DOVE
    return None


def choose_tactic(
    genome: StrategyGenome,
    store: MemoryStore,
    self_id: int,
    opponent: int,
    refs: AbstractSet[int],
    params: GameParams,
    rng: np.random.Generator,
) -> Tactic:
    tactic = decide(genome, store, self_id, opponent, refs)
    if tactic is None:
        return mixed_ess_tactic(params, rng)
    return tactic
