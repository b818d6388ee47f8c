"""Evolutionary hawk-dove simulations with reference-based transitive inference."""

__version__ = "0.1.0"

from .evolution import (
    ConfigError,
    Population,
    SimulationConfig,
    SimulationResult,
    positivity_offset,
    reproduce,
    mutate,
    run_generation,
    run_simulation,
)
from .experiments import ScenarioSpec, overlap_check, run_scenario
from .game import ContestOutcome, GameParams, Tactic, mixed_ess_tactic, resolve_contest, win_probability
from .inference import (
    CANONICAL_ROSTER,
    GenomeError,
    StrategyGenome,
    assign_reference_sets,
    choose_tactic,
    genome_label,
    parse_genome,
    transitive_assessment,
)
from .metrics import CiSnapshot, consistency_index, dominant_genome, frequency_vector
from .perception import ContestRecord, MemoryStore, direct_assessment, observe, pair_assessment, sign_of
from .results import emit_results, replay

