"""Scenario harness: grids of independently seeded runs and their averages.

A scenario is a ``base`` parameter set plus a ``grid`` of swept values.
Every (grid cell, iteration) pair is one run with its own seed, derived
from the master seed, a checksum of the cell's swept values and the
iteration number, so adding cells never perturbs the streams of others.
"""

from __future__ import annotations

import itertools
import json
import logging
import math
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .evolution import ConfigError, Population, SimulationConfig, run_generation, run_simulation
from .game import GameParams
from .inference import (
    CANONICAL_ROSTER,
    GenomeError,
    StrategyGenome,
    assign_reference_sets,
    parse_genome,
)
from .metrics import dominant_genome, mean_and_se

log = logging.getLogger(__name__)

EVOLUTION_SCENARIOS = ("evolve-mutation", "evolve-fixed-mix", "initial-proportion-sweep", "ess-probe")
CI_SCENARIOS = ("ci-curve", "ci-vs-cost", "ci-vs-groupsize")
SCENARIOS = EVOLUTION_SCENARIOS + CI_SCENARIOS + ("overlap-check",)

DESCRIPTIONS = {
    "evolve-mutation": "evolution with mutation from an all-mixer start, swept over group size",
    "evolve-fixed-mix": "no mutation, equal initial mix of strategies; counts which one takes over",
    "initial-proportion-sweep": "II against one TI strategy at several initial TI shares",
    "ess-probe": "monomorphic starts under rare mutation; does the resident hold on",
    "ci-curve": "CI1 over the contests of one generation, one monomorphic population per strategy",
    "ci-vs-cost": "end-of-generation CI1 for several shared-reference counts and fight costs",
    "ci-vs-groupsize": "end-of-generation CI1 for several strategies and group sizes",
    "overlap-check": "Monte Carlo size of the intersection of everyone's private reference sets",
}

# keys a cell may carry; anything else in a config is rejected
KNOWN_KEYS = {
    "n", "initial", "contests_per_pair", "g", "mu", "mc", "v", "c", "a",
    "mutation_alphabet", "selection", "offset", "memory", "engine",
    "threshold", "record_every", "ci_stride", "strategy", "start",
    "ti_share", "ti_strategy", "w",
}

DEFAULTS: Dict[str, Any] = {
    "contests_per_pair": 2.0,
    "g": 1,
    "mu": 0.0,
    "mc": 14,
    "v": 4.0,
    "c": 30.0,
    "a": 1.0,
    "mutation_alphabet": [0, 1, 2, 4, 6, 8],
    "selection": "multinomial",
    "offset": "expected",
    "memory": "split",
    "engine": "fast",
    "threshold": 0.9,
    "record_every": 0,
    "ci_stride": 0,
}

_FIXED_MIX = ["M", "II", "TI2-2", "TI4-4", "TI6-6", "TI8-8", "TIN-N"]

PRESETS: Dict[str, Dict[str, dict]] = {
    "evolve-mutation": {
        "paper": {"base": {"g": 10000, "mu": 0.001, "initial": {"M": 1}, "record_every": 100},
                  "grid": {"n": [10, 20, 30, 40, 50]}, "iterations": 50},
        "desk": {"base": {"g": 1000, "mu": 0.001, "initial": {"M": 1}, "record_every": 50},
                 "grid": {"n": [10, 20]}, "iterations": 5},
    },
    "evolve-fixed-mix": {
        "paper": {"base": {"n": 35, "g": 500, "initial": {k: 1 for k in _FIXED_MIX}},
                  "grid": {}, "iterations": 50},
        "desk": {"base": {"n": 35, "g": 500, "initial": {k: 1 for k in _FIXED_MIX}},
                 "grid": {}, "iterations": 20},
    },
    "initial-proportion-sweep": {
        "paper": {"base": {"n": 30, "g": 500},
                  "grid": {"ti_strategy": ["TI2-2", "TI4-4", "TI6-6", "TI8-8"],
                           "ti_share": [0.1, 0.3, 0.5, 0.7, 0.9]}, "iterations": 50},
        "desk": {"base": {"n": 30, "g": 500, "ti_strategy": "TI8-8"},
                 "grid": {"ti_share": [0.1, 0.3, 0.5, 0.7, 0.9]}, "iterations": 20},
    },
    "ess-probe": {
        "paper": {"base": {"n": 40, "g": 10000, "mu": 0.001},
                  "grid": {"start": ["II", "TI4-0", "TI4-4", "TI8-0", "TI8-8"]}, "iterations": 50},
        "desk": {"base": {"n": 40, "g": 2000, "mu": 0.001},
                 "grid": {"start": ["II", "TI4-4", "TI8-0", "TI8-8"]}, "iterations": 10},
    },
    "ci-curve": {
        "paper": {"base": {"n": 16, "ci_stride": 1},
                  "grid": {"strategy": ["II", "TI2-2", "TI4-4", "TI6-6", "TI8-8", "TIN-N"]},
                  "iterations": 100},
        "desk": {"base": {"n": 16, "ci_stride": 10},
                 "grid": {"strategy": ["II", "TI2-2", "TI4-4", "TI6-6", "TI8-8", "TIN-N"]},
                 "iterations": 100},
    },
    "ci-vs-cost": {
        "paper": {"base": {"n": 16},
                  "grid": {"c": [5.0, 12.0, 30.0],
                           "strategy": ["TI8-0", "TI8-2", "TI8-4", "TI8-6", "TI8-8"]},
                  "iterations": 100},
        "desk": {"base": {"n": 16},
                 "grid": {"c": [5.0, 12.0, 30.0], "strategy": ["TI8-0", "TI8-8"]},
                 "iterations": 100},
    },
    "ci-vs-groupsize": {
        "paper": {"base": {},
                  "grid": {"n": [15, 20, 30, 40, 50],
                           "strategy": ["TI2-2", "TI4-4", "TI6-6", "TI8-8"]},
                  "iterations": 50},
        "desk": {"base": {},
                 "grid": {"n": [15, 30], "strategy": ["TI2-2", "TI8-8"]},
                 "iterations": 20},
    },
    "overlap-check": {
        "paper": {"base": {"n": 10}, "grid": {"w": [7, 8, 9, 10]}, "iterations": 100000},
        "desk": {"base": {"n": 10}, "grid": {"w": [7, 8, 9, 10]}, "iterations": 100000},
    },
}


@dataclass
class ScenarioSpec:
    scenario: str
    base: Dict[str, Any] = field(default_factory=dict)
    grid: Dict[str, List[Any]] = field(default_factory=dict)
    iterations: int = 1
    seed: int = 0
    preset: Optional[str] = None
    out: Optional[str] = None

    @classmethod
    def from_preset(cls, scenario: str, preset: str = "desk", **overrides) -> "ScenarioSpec":
        if scenario not in PRESETS:
            raise ConfigError(f"scenario: unknown scenario {scenario!r}")
        if preset not in PRESETS[scenario]:
            raise ConfigError(f"preset: unknown preset {preset!r} (choose paper or desk)")
        p = json.loads(json.dumps(PRESETS[scenario][preset]))
        spec = cls(scenario, p["base"], p["grid"], p["iterations"], preset=preset)
        return spec.merged(overrides) if overrides else spec

    def merged(self, config: Mapping[str, Any]) -> "ScenarioSpec":
        """Overlay a config mapping: base keys update, grid keys replace."""
        unknown = set(config) - {"scenario", "base", "grid", "iterations", "seed", "out", "preset"}
        if unknown:
            raise ConfigError(f"config: unknown fields {sorted(unknown)}")
        if "scenario" in config and config["scenario"] != self.scenario:
            raise ConfigError(
                f"scenario: config is for {config['scenario']!r}, not {self.scenario!r}"
            )
        # a key pinned in the config's base stops being swept, and vice versa
        base = dict(self.base)
        base.update(config.get("base", {}))
        grid = {k: v for k, v in self.grid.items() if k not in config.get("base", {})}
        grid.update(config.get("grid", {}))
        for key in grid:
            base.pop(key, None)
        return ScenarioSpec(
            self.scenario,
            base,
            grid,
            int(config.get("iterations", self.iterations)),
            int(config.get("seed", self.seed)),
            self.preset,
            config.get("out", self.out),
        )

    def cells(self) -> List[Dict[str, Any]]:
        """Grid points in row-major order of the grid keys as given."""
        keys = list(self.grid)
        return [dict(zip(keys, combo)) for combo in itertools.product(*(self.grid[k] for k in keys))]

    def cell_values(self, cell: Mapping[str, Any]) -> Dict[str, Any]:
        values = dict(DEFAULTS)
        values.update(self.base)
        values.update(cell)
        return values

    def validate(self) -> None:
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"scenario: unknown scenario {self.scenario!r}")
        if self.iterations < 1:
            raise ConfigError(f"iterations: must be at least 1, got {self.iterations}")
        for source, keys in (("base", self.base), ("grid", self.grid)):
            unknown = set(keys) - KNOWN_KEYS
            if unknown:
                raise ConfigError(f"{source}: unknown parameters {sorted(unknown)}")
        for key, values in self.grid.items():
            if not isinstance(values, list) or not values:
                raise ConfigError(f"grid.{key}: needs a non-empty list of values")
        for cell in self.cells():
            try:
                resolve_cell(self.scenario, self.cell_values(cell))
            except (ConfigError, GenomeError) as exc:
                raise ConfigError(f"grid cell {_cell_key(cell)}: {exc}") from None

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "preset": self.preset,
            "seed": self.seed,
            "iterations": self.iterations,
            "base": self.base,
            "grid": self.grid,
        }


def resolve_label(label: str, n: int, field_name: str = "strategy") -> StrategyGenome:
    """Parse a strategy label; ``TIN-N`` and friends take the group size."""
    if label.startswith("TI"):
        label = label.replace("N", str(n))
    try:
        return parse_genome(label, n)
    except GenomeError as exc:
        raise ConfigError(f"{field_name}: {exc}") from None


def apportion(weights: Mapping[StrategyGenome, float], n: int) -> Dict[StrategyGenome, int]:
    """Largest-remainder split of ``n`` players by weight, ties to the earlier genome."""
    genomes = sorted(weights)
    w = np.array([float(weights[g]) for g in genomes])
    if np.any(w < 0) or w.sum() <= 0:
        raise ConfigError("initial: weights must be non-negative with a positive total")
    quotas = w * n / w.sum()
    counts = np.floor(quotas + 1e-9).astype(int)
    order = sorted(range(len(genomes)), key=lambda k: (-(quotas[k] - counts[k]), k))
    for k in order[: n - int(counts.sum())]:
        counts[k] += 1
    return {g: int(c) for g, c in zip(genomes, counts) if c > 0}


def _composition(scenario: str, values: Mapping[str, Any], n: int) -> Dict[StrategyGenome, int]:
    if scenario in CI_SCENARIOS:
        if "strategy" not in values:
            raise ConfigError("strategy: CI scenarios need a strategy label")
        return {resolve_label(values["strategy"], n): n}
    if "start" in values:
        return {resolve_label(values["start"], n, "start"): n}
    if "ti_share" in values:
        share = float(values["ti_share"])
        if not 0.0 <= share <= 1.0:
            raise ConfigError(f"ti_share: must lie in [0, 1], got {share}")
        ti = resolve_label(values.get("ti_strategy", "TI8-8"), n, "ti_strategy")
        k = int(math.floor(share * n + 0.5))
        return {g: c for g, c in ((ti, k), (parse_genome("II"), n - k)) if c > 0}
    if "initial" not in values:
        raise ConfigError("initial: no initial composition given")
    weights: Dict[StrategyGenome, float] = {}
    for label, w in values["initial"].items():
        genome = resolve_label(label, n, "initial")
        weights[genome] = weights.get(genome, 0.0) + float(w)
    return apportion(weights, n)


def resolve_cell(scenario: str, values: Mapping[str, Any]):
    """Turn one cell's parameter values into what its runs need."""
    if "n" not in values:
        raise ConfigError("n: group size is required")
    n = int(values["n"])
    if scenario == "overlap-check":
        w = int(values.get("w", n))
        if not 0 <= w <= n:
            raise ConfigError(f"w: needs 0 <= w <= n={n}, got {w}")
        return n, w
    try:
        params = GameParams(float(values["v"]), float(values["c"]), float(values["a"]))
    except ValueError as exc:
        raise ConfigError(f"v/c/a: {exc}") from None
    mc = values["mc"]
    return SimulationConfig(
        n=n,
        initial_composition=_composition(scenario, values, n),
        contests_per_pair=float(values["contests_per_pair"]),
        g=int(values["g"]) if scenario in EVOLUTION_SCENARIOS else 1,
        mu=float(values["mu"]) if scenario in EVOLUTION_SCENARIOS else 0.0,
        mc=None if mc is None else int(mc),
        params=params,
        mutation_alphabet=tuple(int(x) for x in values["mutation_alphabet"]),
        selection=values["selection"],
        offset=values["offset"],
        memory=values["memory"],
        engine=values["engine"],
    )


def _cell_key(cell: Mapping[str, Any]) -> str:
    return json.dumps(cell, sort_keys=True, separators=(",", ":"))


def derive_seed(master: int, cell: Mapping[str, Any], iteration: int) -> int:
    """Per-run seed from the master seed, the cell's swept values and the iteration."""
    key = zlib.crc32(_cell_key(cell).encode("utf-8"))
    ss = np.random.SeedSequence(int(master), spawn_key=(key, int(iteration)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class ResultRow:
    scenario: str
    iteration: Optional[int]  # None on per-cell aggregate rows
    seed: Optional[int]
    step: int
    params: Tuple[Tuple[str, Any], ...]
    genome: str
    kind: str
    value: float


@dataclass
class ResultTable:
    spec: ScenarioSpec
    rows: List[ResultRow]
    runs: List[dict]

    @property
    def param_names(self) -> List[str]:
        return list(self.spec.grid)


def overlap_check(n: int, w: int, iterations: int, rng: np.random.Generator, chunk: int = 10000) -> Tuple[float, float]:
    """Mean and standard error of the size of the all-player intersection.

    Every one of ``n`` players draws ``w`` private reference members out of
    ``n``; the expectation is ``n * (w / n) ** n``.
    """
    if not 0 <= w <= n:
        raise ValueError(f"need 0 <= w <= n, got w={w}, n={n}")
    sizes = np.empty(iterations, dtype=np.int64)
    done = 0
    while done < iterations:
        m = min(chunk, iterations - done)
        # a random permutation per player; the first w entries are its picks
        picks = np.argsort(rng.random((m, n, n)), axis=2)[:, :, :w]
        member = np.zeros((m, n, n), dtype=bool)
        np.put_along_axis(member, picks, True, axis=2)
        sizes[done:done + m] = member.all(axis=1).sum(axis=1)
        done += m
    mean, se = mean_and_se(sizes)
    return mean, se


def overlap_closed_form(n: int, w: int) -> float:
    return n * (w / n) ** n


def overlap_by_assignment(n: int, w: int, iterations: int, rng: np.random.Generator) -> float:
    """Same quantity through :func:`assign_reference_sets` (slow, for cross-checks)."""
    if w < 2:
        raise ValueError("reference sets need w >= 2")
    genomes = [StrategyGenome(w, 0)] * n
    total = 0
    for _ in range(iterations):
        refs = assign_reference_sets(genomes, rng)
        total += len(frozenset.intersection(*refs))
    return total / iterations


def _labels(genomes) -> List[str]:
    return [g.label for g in genomes]


def _evolution_rows(scenario, config, values, params, iteration, seed) -> List[ResultRow]:
    result = run_simulation(config.with_(seed=seed), np.random.default_rng(seed))
    canonical = set(CANONICAL_ROSTER)
    traj = result.trajectory
    rows = []

    def freq_rows(k, step, kind):
        for col, genome in enumerate(result.genomes):
            f = float(traj[k, col])
            if genome in canonical or f > 0:
                rows.append(ResultRow(scenario, iteration, seed, step, params, genome.label, kind, f))

    every = int(values["record_every"])
    if every > 0:
        for k in range(0, config.g + 1, every):
            freq_rows(k, k, "frequency")
    freq_rows(config.g, config.g, "final_frequency")
    dom = dominant_genome(result, float(values["threshold"]))
    g = config.g
    rows.append(ResultRow(scenario, iteration, seed, g, params, dom.genome.label, "dominant", dom.frequency))
    rows.append(ResultRow(scenario, iteration, seed, g, params, "", "converged", float(dom.dominant)))
    rows.append(ResultRow(scenario, iteration, seed, g, params, "", "tie", float(dom.tie)))
    rows.append(ResultRow(scenario, iteration, seed, g, params, "", "clamp_rate", result.clamp_rate))
    return rows


def _ci_rows(scenario, config, values, params, iteration, seed) -> List[ResultRow]:
    rng = np.random.default_rng(seed)
    pop = Population.from_composition(config.initial_composition, config.mc, config.memory)
    stride = int(values["ci_stride"])
    if stride <= 0:
        stride = config.n_contests
    gen = run_generation(pop, config, rng, ci_stride=stride, keep_memories=False)
    label = pop.genomes[0].label
    return [
        ResultRow(scenario, iteration, seed, int(s), params, label, "ci1", float(v))
        for s, v in zip(gen.ci_steps, gen.ci1)
    ]


def _overlap_rows(scenario, n, w, params, iteration, seed, draws) -> List[ResultRow]:
    mean, se = overlap_check(n, w, draws, np.random.default_rng(seed))
    return [
        ResultRow(scenario, iteration, seed, 0, params, "", "mean_overlap", mean),
        ResultRow(scenario, iteration, seed, 0, params, "", "se_overlap", se),
        ResultRow(scenario, iteration, seed, 0, params, "", "closed_form", overlap_closed_form(n, w)),
    ]


def execute_run(task) -> List[ResultRow]:
    """One seeded run; top level so worker processes can pickle it."""
    scenario, values, cell, iteration, seed, draws = task
    params = tuple(cell.items())
    resolved = resolve_cell(scenario, values)
    if scenario == "overlap-check":
        n, w = resolved
        return _overlap_rows(scenario, n, w, params, iteration, seed, draws)
    if scenario in CI_SCENARIOS:
        return _ci_rows(scenario, resolved, values, params, iteration, seed)
    return _evolution_rows(scenario, resolved, values, params, iteration, seed)


def _aggregate(scenario: str, params, rows: Sequence[ResultRow], iterations: int) -> List[ResultRow]:
    out: List[ResultRow] = []
    if scenario == "overlap-check":
        return out
    if scenario in CI_SCENARIOS:
        by_step: Dict[Tuple[int, str], List[float]] = {}
        for r in rows:
            by_step.setdefault((r.step, r.genome), []).append(r.value)
        for (step, genome), vals in sorted(by_step.items()):
            mean, se = mean_and_se(vals)
            out.append(ResultRow(scenario, None, None, step, params, genome, "mean_ci1", mean))
            out.append(ResultRow(scenario, None, None, step, params, genome, "se_ci1", se))
        return out

    finals: Dict[str, List[float]] = {}
    order: Dict[str, Tuple[int, str]] = {}
    step = 0
    converged = 0
    wins: Dict[str, int] = {}
    for r in rows:
        if r.kind == "final_frequency":
            finals.setdefault(r.genome, []).append(r.value)
            order.setdefault(r.genome, _genome_sort_key(r.genome))
            step = r.step
    by_run: Dict[int, Dict[str, ResultRow]] = {}
    for r in rows:
        if r.kind in ("dominant", "converged"):
            by_run.setdefault(r.iteration, {})[r.kind] = r
    for run in by_run.values():
        if run["converged"].value > 0:
            converged += 1
            wins[run["dominant"].genome] = wins.get(run["dominant"].genome, 0) + 1
    for genome in sorted(finals, key=lambda lab: order[lab]):
        vals = finals[genome] + [0.0] * (iterations - len(finals[genome]))
        out.append(ResultRow(scenario, None, None, step, params, genome, "mean_final_frequency",
                             float(np.mean(vals))))
    for genome in sorted(finals, key=lambda lab: order[lab]):
        k = wins.get(genome, 0)
        share = k / converged if converged else float("nan")
        out.append(ResultRow(scenario, None, None, step, params, genome, "wins", float(k)))
        out.append(ResultRow(scenario, None, None, step, params, genome, "dominance_share", share))
    out.append(ResultRow(scenario, None, None, step, params, "", "converged_share", converged / iterations))
    return out


def _genome_sort_key(label: str):
    try:
        return (0, parse_genome(label))
    except GenomeError:
        return (1, label)


def run_scenario(spec: ScenarioSpec, workers: int = 1) -> ResultTable:
    """Run every (cell, iteration) of ``spec`` and append per-cell averages.

    Rows come back grouped by cell in grid order, runs in iteration order,
    then the cell's aggregate rows, whatever the number of workers.
    """
    spec.validate()
    cells = spec.cells()
    tasks = []
    runs = []
    for cell in cells:
        values = spec.cell_values(cell)
        if spec.scenario == "overlap-check":
            seed = derive_seed(spec.seed, cell, 0)
            tasks.append((spec.scenario, values, cell, 0, seed, spec.iterations))
            runs.append({"params": cell, "iteration": 0, "seed": seed})
            continue
        for it in range(spec.iterations):
            seed = derive_seed(spec.seed, cell, it)
            tasks.append((spec.scenario, values, cell, it, seed, 0))
            runs.append({"params": cell, "iteration": it, "seed": seed})
    log.info("%s: %d cells, %d runs, %d workers", spec.scenario, len(cells), len(tasks), workers)

    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(execute_run, tasks, chunksize=1))
    else:
        results = [execute_run(t) for t in tasks]

    rows: List[ResultRow] = []
    k = 0
    for cell in cells:
        n_runs = 1 if spec.scenario == "overlap-check" else spec.iterations
        cell_rows = [r for chunk in results[k:k + n_runs] for r in chunk]
        k += n_runs
        rows.extend(cell_rows)
        rows.extend(_aggregate(spec.scenario, tuple(cell.items()), cell_rows, spec.iterations))
    return ResultTable(spec, rows, runs)


def values_of(table: ResultTable, kind: str, **match) -> List[ResultRow]:
    """Rows of one kind whose swept parameters and fields match ``match``."""
    out = []
    for r in table.rows:
        if r.kind != kind:
            continue
        params = dict(r.params)
        ok = True
        for key, want in match.items():
            have = getattr(r, key) if key in ("genome", "step", "iteration") else params.get(key)
            if have != want:
                ok = False
                break
        if ok:
            out.append(r)
    return out

