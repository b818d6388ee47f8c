import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_ci1, brute_pair, brute_transitive
from refti.evolution import Population, SimulationConfig, run_generation
from refti.game import GameParams
from refti.inference import CANONICAL_ROSTER, StrategyGenome, parse_genome
from refti.metrics import (
    CiSnapshot,
    consistency_index,
    dominant_genome,
    frequency_vector,
    mean_and_se,
)
from refti.perception import ContestRecord, MemoryStore

II = StrategyGenome(1)


def rec(t, w, l):
    return ContestRecord(t, min(w, l), max(w, l), w)


def round_robin_population(n, order):
    """Every player remembers a full round robin consistent with ``order``."""
    rank = {p: k for k, p in enumerate(order)}
    records = []
    t = 0
    for i in range(n):
        for j in range(i + 1, n):
            w, l = (i, j) if rank[i] < rank[j] else (j, i)
            records.append(rec(t, w, l))
            t += 1
    pop = Population([II] * n, mc=None, memory="joint")
    pop.memories = [MemoryStore(None, records) for _ in range(n)]
    return pop


def test_snapshot_relation():
    s = CiSnapshot.from_ci1(0.3)
    assert s.ci == pytest.approx(0.35) and 0 <= s.ci <= 0.5
    assert s.ci1 == 1 - s.ci / 0.5


def test_full_consensus():
    pop = round_robin_population(6, [3, 0, 5, 1, 4, 2])
    snap = consistency_index(pop, GameParams())
    assert snap.ci1 == 1.0 and snap.ci == 0.0


def test_complete_disagreement():
    # each player believes it beat everyone, so everybody plays hawk
    n = 4
    pop = Population([II] * n, mc=None, memory="joint")
    pop.memories = [
        MemoryStore(None, [rec(t, p, q) for t, q in enumerate(x for x in range(n) if x != p)])
        for p in range(n)
    ]
    snap = consistency_index(pop, GameParams())
    assert snap.ci1 == 0.0 and snap.ci == 0.5


def test_all_mixers_closed_form():
    pop = Population([StrategyGenome(0)] * 7)
    assert consistency_index(pop, GameParams(4, 8)).ci1 == pytest.approx(0.5, abs=1e-15)
    p = 4 / 30
    assert consistency_index(pop, GameParams(4, 30)).ci1 == pytest.approx(2 * p * (1 - p), abs=1e-15)


def test_all_mixers_monte_carlo():
    rng = np.random.default_rng(0)
    n, draws = 7, 20000
    hawk = rng.random((draws, n)) < 0.5
    comp = [(hawk[:, i] != hawk[:, j]).mean() for i in range(n) for j in range(i + 1, n)]
    assert np.mean(comp) == pytest.approx(0.5, abs=0.01)


def _oracle_ci1(pop, params):
    p = params.hawk_probability
    n = pop.n
    probs = [[0.0] * n for _ in range(n)]
    for i in range(n):
        records = [(r.winner, r.loser) for r in pop.memories[i]]
        g = pop.genomes[i]
        for j in range(n):
            if i == j:
                continue
            d = brute_pair(records, j, i) if g.x >= 1 else 0
            if d == 0 and g.x >= 2:
                d = brute_transitive(records, i, j, pop.refs[i])
            probs[i][j] = 1.0 if d < 0 else 0.0 if d > 0 else p
    return brute_ci1(probs)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["split", "joint"]))
def test_matches_oracle_after_real_generation(seed, memory):
    labels = ["M", "II", "TI2-0", "TI4-2", "TI6-6"]
    comp = {parse_genome(k): 2 for k in labels}
    config = SimulationConfig(n=10, initial_composition=comp, mc=6, memory=memory, engine="reference")
    pop = Population.from_composition(comp, 6, memory)
    run_generation(pop, config, np.random.default_rng(seed))
    snap = consistency_index(pop, config.params)
    assert snap.ci1 == pytest.approx(_oracle_ci1(pop, config.params), abs=1e-12)


def test_measurement_is_pure():
    comp = {parse_genome("TI4-4"): 8, II: 4}
    config = SimulationConfig(n=12, initial_composition=comp)
    pop = Population.from_composition(comp)
    run_generation(pop, config, np.random.default_rng(2))
    before = pop.state_key()
    consistency_index(pop, config.params)
    assert pop.state_key() == before


def test_frequency_vector():
    freqs = frequency_vector([II] * 30 + [parse_genome("TI4-4")] * 10)
    assert freqs[II] == 0.75 and freqs[parse_genome("TI4-4")] == 0.25
    assert set(CANONICAL_ROSTER) <= set(freqs)
    assert sum(freqs.values()) == pytest.approx(1.0, abs=1e-12)
    assert frequency_vector([parse_genome("TI8-8")] * 5)[parse_genome("TI8-8")] == 1.0


def test_dominance():
    ti88 = parse_genome("TI8-8")
    d = dominant_genome({ti88: 0.97, II: 0.03})
    assert d.genome == ti88 and d.dominant and not d.tie
    tie = dominant_genome({II: 0.5, parse_genome("TI2-2"): 0.5})
    assert tie.tie and tie.genome == II and not tie.dominant
    assert dominant_genome({II: 1.0}).dominant
    assert not dominant_genome({ti88: 0.85, II: 0.15}).dominant
    assert dominant_genome({ti88: 0.85, II: 0.15}, threshold=0.8).dominant


def test_mean_and_se():
    m, se = mean_and_se([1.0, 2.0, 3.0, 4.0])
    assert m == 2.5 and se == pytest.approx(np.std([1, 2, 3, 4], ddof=1) / 2)
