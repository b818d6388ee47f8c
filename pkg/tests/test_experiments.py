import json

import numpy as np
import pytest

from refti.cli import main
from refti.evolution import ConfigError
from refti.experiments import (
    PRESETS,
    SCENARIOS,
    ScenarioSpec,
    apportion,
    derive_seed,
    overlap_by_assignment,
    overlap_check,
    overlap_closed_form,
    resolve_cell,
    run_scenario,
    values_of,
)
from refti.inference import CANONICAL_ROSTER, parse_genome
from refti.results import emit_results, format_value, header, replay


def small_mix(**kw):
    spec = ScenarioSpec.from_preset("evolve-fixed-mix", "desk")
    return spec.merged({"base": {"n": 14, "g": 30, "initial": {"M": 1, "II": 1, "TI4-4": 2}},
                        "iterations": 4, "seed": 3, **kw})


def test_every_scenario_has_both_presets():
    assert set(PRESETS) == set(SCENARIOS)
    for name in SCENARIOS:
        for preset in ("paper", "desk"):
            ScenarioSpec.from_preset(name, preset).validate()


def test_fixed_mix_composition():
    spec = ScenarioSpec.from_preset("evolve-fixed-mix", "paper")
    config = resolve_cell(spec.scenario, spec.cell_values({}))
    assert set(config.initial_composition.values()) == {5}
    assert parse_genome("TI35-35") in config.initial_composition


def test_apportion():
    a, b, c = (parse_genome(k) for k in ("M", "II", "TI2-2"))
    assert apportion({a: 1, b: 1, c: 1}, 10) == {a: 4, b: 3, c: 3}
    assert apportion({a: 0.3, b: 0.7}, 30) == {a: 9, b: 21}


def test_grid_validation_rejects_bad_cells():
    spec = ScenarioSpec.from_preset("ci-vs-groupsize", "desk").merged({"grid": {"n": [6, 30]}})
    with pytest.raises(ConfigError, match="n"):
        spec.validate()
    with pytest.raises(ConfigError, match="grid.c"):
        ScenarioSpec.from_preset("ci-vs-cost", "desk").merged({"grid": {"c": []}}).validate()
    with pytest.raises(ConfigError, match="unknown parameters"):
        ScenarioSpec("ci-curve", {"n": 16, "strategy": "II", "bogus": 1}).validate()
    with pytest.raises(ConfigError, match="initial"):
        small_mix(base={"initial": {"TI99-0": 1}}).validate()


def test_seed_derivation_is_local_to_cells():
    s1 = derive_seed(5, {"n": 10}, 3)
    assert s1 == derive_seed(5, {"n": 10}, 3)
    assert s1 != derive_seed(5, {"n": 20}, 3)
    assert s1 != derive_seed(6, {"n": 10}, 3)
    narrow = small_mix(grid={"n": [14]})
    wide = small_mix(grid={"n": [12, 14, 16]})
    seeds = lambda spec: {(json.dumps(r["params"]), r["iteration"]): r["seed"] for r in run_scenario(spec).runs}
    a, b = seeds(narrow), seeds(wide)
    assert all(b[k] == v for k, v in a.items())


def test_cell_averages_match_runs():
    table = run_scenario(small_mix())
    for genome in {r.genome for r in values_of(table, "final_frequency")}:
        runs = [r.value for r in values_of(table, "final_frequency", genome=genome)]
        runs += [0.0] * (4 - len(runs))
        (mean,) = values_of(table, "mean_final_frequency", genome=genome)
        assert abs(mean.value - np.mean(runs)) <= 1e-12
    labels = {r.genome for r in values_of(table, "final_frequency")}
    assert {g.label for g in CANONICAL_ROSTER} <= labels


def test_dominance_only_over_converged_runs():
    table = run_scenario(small_mix())
    converged = [r for r in values_of(table, "converged") if r.value == 1.0]
    wins = sum(r.value for r in values_of(table, "wins"))
    assert wins == len(converged)


def test_ci_aggregates():
    spec = ScenarioSpec.from_preset("ci-vs-cost", "desk").merged({"iterations": 5, "grid": {"c": [30.0]}})
    table = run_scenario(spec)
    for strategy in ("TI8-0", "TI8-8"):
        rows = values_of(table, "ci1", genome=strategy, step=240)
        (mean,) = values_of(table, "mean_ci1", genome=strategy, step=240)
        assert len(rows) == 5 and abs(mean.value - np.mean([r.value for r in rows])) <= 1e-12


def test_overlap_oracles():
    rng = np.random.default_rng(0)
    assert overlap_closed_form(10, 10) == 10
    assert overlap_closed_form(10, 9) == pytest.approx(3.486784401)
    assert overlap_closed_form(10, 7) == pytest.approx(0.282475249)
    mean, _ = overlap_check(10, 10, 100, rng)
    assert mean == 10
    mean, se = overlap_check(10, 9, 20000, rng)
    assert abs(mean - overlap_closed_form(10, 9)) < 4 * se
    via_sets = overlap_by_assignment(10, 9, 4000, rng)
    assert abs(via_sets - overlap_closed_form(10, 9)) < 0.12


def test_csv_format(tmp_path):
    table = run_scenario(small_mix())
    results, manifest = emit_results(table, tmp_path)
    raw = results.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert lines[0] == "scenario,iteration,seed,step,genome,kind,value"
    assert all(len(line.split(",")) == 7 for line in lines)
    assert json.loads(manifest.read_text())["spec"]["seed"] == 3
    assert format_value(0.1) == "0.10000000000000001"
    assert format_value(1.0) == "1"
    assert header(["n", "c"]) == ("scenario", "iteration", "seed", "step", "param_n", "param_c",
                                  "genome", "kind", "value")


def test_empty_table_rejected(tmp_path):
    table = run_scenario(small_mix())
    table.rows = []
    with pytest.raises(ValueError):
        emit_results(table, tmp_path / "out")
    assert not (tmp_path / "out").exists()


def test_unwritable_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError):
        emit_results(run_scenario(small_mix()), blocker / "sub")


def test_replay_is_byte_identical(tmp_path):
    emit_results(run_scenario(small_mix(grid={"n": [12, 14]})), tmp_path / "a")
    replay(tmp_path / "a" / "manifest.json", tmp_path / "b")
    for name in ("results.csv", "manifest.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_cli(tmp_path, capsys):
    config = tmp_path / "c.json"
    config.write_text(json.dumps({"base": {"n": 12}, "grid": {"strategy": ["II", "TI4-4"]}}))
    assert main(["run", "ci-curve", "--config", str(config), "--iterations", "3",
                 "--seed", "9", "--out", str(tmp_path / "run")]) == 0
    text = (tmp_path / "run" / "results.csv").read_text()
    assert text.startswith("scenario,iteration,seed,step,param_strategy,genome,kind,value\n")
    assert main(["replay", str(tmp_path / "run" / "manifest.json"), "--out", str(tmp_path / "again")]) == 0
    assert (tmp_path / "again" / "results.csv").read_text() == text
    assert main(["list-scenarios"]) == 0
    assert "overlap-check" in capsys.readouterr().out


def test_cli_reports_bad_config(tmp_path, capsys):
    config = tmp_path / "c.json"
    config.write_text(json.dumps({"base": {"n": 4}, "grid": {"strategy": ["TI8-8"]}}))
    assert main(["run", "ci-curve", "--config", str(config), "--out", str(tmp_path / "x")]) == 2
    assert "TI8-8" in capsys.readouterr().err
    assert not (tmp_path / "x").exists()
