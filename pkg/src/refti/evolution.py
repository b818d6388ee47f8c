"""The generational loop.

Each generation resets RHP, memories and reference sets, plays ``T``
random pairwise contests, shifts every payoff by a positivity offset,
reallocates the ``N`` slots in proportion to each genome's aggregate
payoff, and mutates the offspring locus by locus.

Draw order inside a generation is fixed so that both engines replay the
same stream: RHP (player order), reference sets (genome order, shared
subset first), then per contest the pair, the lower-index player's
fallback draw, the higher-index player's fallback draw and the fight.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from . import _kernel
from .game import GameParams, draw_rhp, resolve_contest
from .inference import (
    CANONICAL_ROSTER,
    StrategyGenome,
    assign_reference_sets,
    choose_tactic,
    legal_y_values,
)
from .perception import ContestRecord, MemoryStore, observe

log = logging.getLogger(__name__)

DEFAULT_ALPHABET = (0, 1, 2, 4, 6, 8)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SimulationConfig:
    n: int
    initial_composition: Mapping[StrategyGenome, int]
    contests_per_pair: float = 2.0
    g: int = 1
    mu: float = 0.0
    mc: Optional[int] = 14
    params: GameParams = field(default_factory=GameParams)
    mutation_alphabet: Tuple[int, ...] = DEFAULT_ALPHABET
    seed: int = 0
    selection: str = "multinomial"
    offset: str = "expected"
    memory: str = "split"
    engine: str = "fast"

    def __post_init__(self):
        object.__setattr__(self, "initial_composition", dict(self.initial_composition))
        object.__setattr__(self, "mutation_alphabet", tuple(self.mutation_alphabet))
        self.validate()

    def validate(self) -> None:
        if self.n < 2:
            raise ConfigError(f"n: group size must be at least 2, got {self.n}")
        if not self.contests_per_pair > 0:
            raise ConfigError(f"contests_per_pair: must be positive, got {self.contests_per_pair}")
        if self.g < 0:
            raise ConfigError(f"g: generations must be non-negative, got {self.g}")
        if not 0.0 <= self.mu <= 1.0:
            raise ConfigError(f"mu: must lie in [0, 1], got {self.mu}")
        if self.mc is not None and self.mc < 1:
            raise ConfigError(f"mc: memory capacity must be positive or unlimited, got {self.mc}")
        if self.selection not in ("deterministic", "multinomial"):
            raise ConfigError(f"selection: unknown mode {self.selection!r}")
        if self.offset not in ("expected", "realized"):
            raise ConfigError(f"offset: unknown mode {self.offset!r}")
        if self.memory not in ("split", "joint"):
            raise ConfigError(f"memory: unknown mode {self.memory!r}")
        if self.engine not in ("fast", "reference"):
            raise ConfigError(f"engine: unknown engine {self.engine!r}")
        total = 0
        for genome, count in self.initial_composition.items():
            if not isinstance(genome, StrategyGenome):
                raise ConfigError(f"initial_composition: key {genome!r} is not a StrategyGenome")
            if count < 0:
                raise ConfigError(f"initial_composition: negative count for {genome.label}")
            if genome.x > self.n:
                raise ConfigError(
                    f"initial_composition: {genome.label} needs {genome.x} reference members"
                    f" but the group has {self.n}"
                )
            total += count
        if total != self.n:
            raise ConfigError(f"initial_composition: counts sum to {total}, expected n={self.n}")
        if self.mu > 0:
            if len(set(self.mutation_alphabet)) < 2:
                raise ConfigError("mutation_alphabet: needs at least two x values")
            bad = [x for x in self.mutation_alphabet if x < 0 or x > self.n]
            if bad:
                raise ConfigError(f"mutation_alphabet: values {bad} outside [0, n={self.n}]")

    @property
    def n_contests(self) -> int:
        """Contests per generation, ``round(Np * N (N - 1) / 2)``."""
        return int(math.floor(self.contests_per_pair * self.n * (self.n - 1) / 2.0 + 0.5))

    @property
    def memory_slots(self) -> int:
        # memories are wiped every generation, so T slots is effectively unlimited
        return self.mc if self.mc is not None else max(self.n_contests, 1)

    def genome_space(self) -> List[StrategyGenome]:
        """Every genome that can appear in a run, in canonical order."""
        space = set(CANONICAL_ROSTER) | set(self.initial_composition)
        if self.mu > 0:
            xs = set(self.mutation_alphabet) | {g.x for g in self.initial_composition}
            for x in xs:
                for y in legal_y_values(x):
                    space.add(StrategyGenome(x, y))
        return sorted(space)

    def with_(self, **changes) -> "SimulationConfig":
        return replace(self, **changes)


@dataclass
class Population:
    genomes: List[StrategyGenome]
    mc: Optional[int] = 14
    memory: str = "split"
    rhp: np.ndarray = None
    refs: List[frozenset] = None
    memories: List[MemoryStore] = None
    payoff: np.ndarray = None

    def __post_init__(self):
        n = len(self.genomes)
        if self.rhp is None:
            self.rhp = np.zeros(n)
        if self.refs is None:
            self.refs = [frozenset()] * n
        if self.memories is None:
            self.memories = self.empty_memories()
        if self.payoff is None:
            self.payoff = np.zeros(n)

    @classmethod
    def from_composition(
        cls, composition: Mapping[StrategyGenome, int], mc: Optional[int] = 14, memory: str = "split"
    ):
        genomes = [g for g in sorted(composition) for _ in range(composition[g])]
        return cls(genomes, mc, memory)

    def empty_memories(self) -> List[MemoryStore]:
        if self.memory == "split":
            return [MemoryStore(self.mc, owner=p) for p in range(self.n)]
        return [MemoryStore(self.mc) for _ in range(self.n)]

    @property
    def n(self) -> int:
        return len(self.genomes)

    def counts(self) -> Dict[StrategyGenome, int]:
        out: Dict[StrategyGenome, int] = {}
        for genome in self.genomes:
            out[genome] = out.get(genome, 0) + 1
        return out

    def reset(self, rng: np.random.Generator) -> None:
        """Start-of-generation reset: RHP, payoffs, memories, reference sets."""
        self.rhp = draw_rhp(self.n, rng)
        self.payoff = np.zeros(self.n)
        self.memories = self.empty_memories()
        self.refs = assign_reference_sets(self.genomes, rng)

    def state_key(self) -> tuple:
        """Hashable snapshot used to check that observers do not mutate."""
        return (
            tuple(self.genomes),
            tuple(self.rhp.tolist()),
            tuple(self.refs),
            tuple(tuple(m) for m in self.memories),
            tuple(self.payoff.tolist()),
        )


@dataclass
class GenerationResult:
    payoff: np.ndarray
    pairs: np.ndarray
    ci_steps: np.ndarray
    ci1: np.ndarray

    def aggregates(self, genomes: Sequence[StrategyGenome], offset: float = 0.0) -> Tuple[Dict[StrategyGenome, float], int]:
        """Per-genome sums of offset payoffs, clamped at zero per player.

        Returns the aggregates and how many players needed the clamp.
        """
        adjusted = self.payoff + offset
        clamped = int(np.count_nonzero(adjusted < 0))
        adjusted = np.maximum(adjusted, 0.0)
        out: Dict[StrategyGenome, float] = {}
        for genome, value in zip(genomes, adjusted):
            out[genome] = out.get(genome, 0.0) + float(value)
        return out, clamped


def _player_kind(genome: StrategyGenome) -> int:
    if genome.uses_transitive:
        return 2
    if genome.uses_direct:
        return 1
    return 0


def _play_reference(pop: Population, config: SimulationConfig, rng, ci_stride: int):
    from .metrics import consistency_index

    n = pop.n
    t_total = config.n_contests
    pairs = np.zeros((t_total, 2), dtype=np.int64)
    steps: List[int] = []
    values: List[float] = []
    if ci_stride > 0:
        steps.append(0)
        values.append(consistency_index(pop, config.params).ci1)
    for t in range(t_total):
        i = int(rng.random() * n)
        j = int(rng.random() * (n - 1))
        if j >= i:
            j += 1
        a, b = min(i, j), max(i, j)
        pairs[t] = (a, b)
        tactic_a = choose_tactic(pop.genomes[a], pop.memories[a], a, b, pop.refs[a], config.params, rng)
        tactic_b = choose_tactic(pop.genomes[b], pop.memories[b], b, a, pop.refs[b], config.params, rng)
        outcome = resolve_contest(tactic_a, tactic_b, pop.rhp[a], pop.rhp[b], config.params, rng)
        pop.payoff[a] += outcome.payoff_a
        pop.payoff[b] += outcome.payoff_b
        if outcome.winner is not None:
            record = ContestRecord(t, a, b, a if outcome.winner == 0 else b)
            for p in range(n):
                if pop.genomes[p].is_mixer:
                    continue
                observe(pop.memories[p], record, p, pop.refs[p])
        if ci_stride > 0 and ((t + 1) % ci_stride == 0 or t + 1 == t_total):
            steps.append(t + 1)
            values.append(consistency_index(pop, config.params).ci1)
    return GenerationResult(pop.payoff.copy(), pairs, np.array(steps, dtype=np.int64), np.array(values))


def _play_fast(pop: Population, config: SimulationConfig, rng, ci_stride: int, keep_memories: bool):
    n = pop.n
    kind = np.array([_player_kind(g) for g in pop.genomes], dtype=np.int64)
    width = max([len(r) for r in pop.refs] + [1])
    refs = np.full((n, width), -1, dtype=np.int64)
    nrefs = np.zeros(n, dtype=np.int64)
    is_ref = np.zeros((n, n), dtype=np.bool_)
    for p, members in enumerate(pop.refs):
        ordered = sorted(members)
        refs[p, : len(ordered)] = ordered
        nrefs[p] = len(ordered)
        is_ref[p, ordered] = True
    cap = config.memory_slots
    params = config.params
    (payoff, mem_t, mem_w, mem_l, mem_size, mem_head, pairs, ci_steps, ci_values) = _kernel.play_generation(
        rng, config.n_contests, np.asarray(pop.rhp, dtype=np.float64), kind, refs, nrefs, is_ref,
        cap, config.memory == "split", params.hawk_probability,
        float(params.v), float(params.c), float(params.a), ci_stride,
    )
    pop.payoff = payoff
    if keep_memories:
        for p in range(n):
            held = []
            for row in (p, p + n):
                for q in range(mem_size[row]):
                    k = (mem_head[row] + q) % cap
                    w, l = int(mem_w[row, k]), int(mem_l[row, k])
                    held.append(ContestRecord(int(mem_t[row, k]), min(w, l), max(w, l), w))
            for record in sorted(held, key=lambda r: r.time):
                pop.memories[p].push(record)
    # same ci round trip as CiSnapshot, so both engines report identical ci1
    ci_values = 1.0 - (0.5 * (1.0 - ci_values)) / 0.5
    return GenerationResult(payoff.copy(), pairs, ci_steps, ci_values)


def run_generation(
    pop: Population,
    config: SimulationConfig,
    rng: np.random.Generator,
    ci_stride: int = 0,
    keep_memories: bool = True,
) -> GenerationResult:
    """Reset ``pop`` and play one generation of contests on it.

    ``ci_stride > 0`` records CI1 before the first contest, after every
    ``ci_stride`` contests and after the last one.
    """
    pop.mc = config.mc
    pop.memory = config.memory
    pop.reset(rng)
    if config.engine == "reference":
        return _play_reference(pop, config, rng, ci_stride)
    return _play_fast(pop, config, rng, ci_stride, keep_memories)


def positivity_offset(config: SimulationConfig) -> float:
    """Magnitude of the expected worst-case payoff of one player in one generation."""
    return config.params.c * config.contests_per_pair * (config.n - 1)


def reproduce(
    aggregates: Mapping[StrategyGenome, float],
    n: int,
    rng: Optional[np.random.Generator] = None,
    mode: str = "deterministic",
    previous: Optional[Mapping[StrategyGenome, int]] = None,
) -> Dict[StrategyGenome, int]:
    """Apportion ``n`` offspring proportionally to the aggregate payoffs.

    Deterministic mode uses largest remainders with ties going to the
    earlier genome in canonical order; multinomial mode draws each slot
    independently.  All-zero aggregates keep ``previous`` unchanged.
    """
    genomes = sorted(aggregates)
    weights = np.array([aggregates[g] for g in genomes], dtype=np.float64)
    if np.any(weights < 0):
        raise ValueError("aggregate payoffs must be non-negative")
    total = weights.sum()
    if total <= 0:
        if previous is None:
            raise ValueError("all aggregates are zero and no previous composition was given")
        return dict(previous)
    if mode == "multinomial":
        if rng is None:
            raise ValueError("multinomial selection needs a random generator")
        cumulative = np.cumsum(weights) / total
        counts = np.zeros(len(genomes), dtype=np.int64)
        for _ in range(n):
            k = int(np.searchsorted(cumulative, rng.random(), side="right"))
            counts[min(k, len(genomes) - 1)] += 1
    elif mode == "deterministic":
        quotas = weights * n / total
        counts = np.floor(quotas).astype(np.int64)
        remainders = quotas - counts
        short = n - int(counts.sum())
        order = sorted(range(len(genomes)), key=lambda k: (-remainders[k], k))
        for k in order[:short]:
            counts[k] += 1
    else:
        raise ValueError(f"unknown selection mode {mode!r}")
    return {g: int(c) for g, c in zip(genomes, counts) if c > 0}


def mutate(
    genome: StrategyGenome,
    mu: float,
    alphabet: Sequence[int],
    rng: np.random.Generator,
) -> StrategyGenome:
    """Independent x-locus then y-locus mutation, each with probability ``mu``.

    A mutated locus moves to a uniformly chosen different legal value; if the
    new x cannot hold the old y, y drops to the largest legal value below it.
    """
    x, y = genome.x, genome.y
    if rng.random() < mu:
        choices = [v for v in alphabet if v != x]
        if choices:
            x = choices[int(rng.random() * len(choices))]
            y = max(v for v in legal_y_values(x) if v <= y)
    if rng.random() < mu:
        choices = [v for v in legal_y_values(x) if v != y]
        if choices:
            y = choices[int(rng.random() * len(choices))]
    if (x, y) == (genome.x, genome.y):
        return genome
    return StrategyGenome(x, y)


@dataclass
class SimulationResult:
    config: SimulationConfig
    genomes: List[StrategyGenome]
    counts: np.ndarray  # (g + 1, len(genomes)); row k is the start of generation k
    clamped: int = 0
    player_generations: int = 0

    @property
    def trajectory(self) -> np.ndarray:
        return self.counts / self.config.n

    def final_frequencies(self) -> Dict[StrategyGenome, float]:
        return dict(zip(self.genomes, self.trajectory[-1].tolist()))

    @property
    def clamp_rate(self) -> float:
        if self.player_generations == 0:
            return 0.0
        return self.clamped / self.player_generations


def run_simulation(config: SimulationConfig, rng: Optional[np.random.Generator] = None) -> SimulationResult:
    """Evolve the population for ``config.g`` generations.

    Without mutation a monomorphic population is absorbing, so once one
    genome holds every slot the remaining rows are filled without playing.
    """
    if rng is None:
        rng = np.random.default_rng(config.seed)
    space = config.genome_space()
    index = {g: k for k, g in enumerate(space)}
    counts = np.zeros((config.g + 1, len(space)), dtype=np.int64)
    composition = {g: c for g, c in config.initial_composition.items() if c > 0}
    for g, c in composition.items():
        counts[0, index[g]] = c
    clamped = 0
    played = 0
    for gen in range(config.g):
        if config.mu == 0 and len(composition) == 1:
            counts[gen + 1:] = counts[gen]
            break
        pop = Population.from_composition(composition, config.mc, config.memory)
        result = run_generation(pop, config, rng, keep_memories=False)
        if config.offset == "expected":
            offset = positivity_offset(config)
        else:
            offset = max(0.0, -float(result.payoff.min()))
        aggregates, n_clamped = result.aggregates(pop.genomes, offset)
        clamped += n_clamped
        played += pop.n
        offspring = reproduce(aggregates, config.n, rng, config.selection, previous=composition)
        composition = {}
        for genome in sorted(offspring):
            for _ in range(offspring[genome]):
                child = mutate(genome, config.mu, config.mutation_alphabet, rng)
                composition[child] = composition.get(child, 0) + 1
        for g, c in composition.items():
            counts[gen + 1, index[g]] = c
    if played and clamped:
        log.debug("payoff clamp fired for %d of %d player-generations", clamped, played)
    return SimulationResult(config, space, counts, clamped, played)

