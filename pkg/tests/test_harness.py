import csv
import json
import math

import numpy as np
import pytest

from csmimo.harness import runner
from csmimo.harness.config import ConfigError, GridSpec, JammerSpec, ScenarioConfig, TargetSpec, preset, preset_names
from csmimo.harness.io import emit_results, load_summary, read_cdf, summary_json, trial_header
from csmimo.harness.runner import CS, run_scenario, run_trial, truth_cells


def small_config(**kw):
    base = dict(name="small", m_t=10, n_r=2, M=10, targets=[TargetSpec(0.2), TargetSpec(-0.2)],
                jammer=JammerSpec(7.0, 400.0), mu=8.0, trials=4, grid=GridSpec(-2.0, 8.0, 0.2),
                baselines=["matched_filter", "capon"])
    base.update(kw)
    return ScenarioConfig(**base)


def test_config_round_trip(tmp_path):
    cfg = small_config()
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg.to_dict()))
    again = ScenarioConfig.load(path)
    assert again == cfg
    assert again.scenario_hash() == cfg.scenario_hash()
    assert cfg.replace(seed=1).scenario_hash() != cfg.scenario_hash()


def test_unknown_field_rejected():
    with pytest.raises(ConfigError) as err:
        ScenarioConfig.from_dict({"name": "x", "colour": "red"})
    assert "colour" in str(err.value)


def test_validation_collects_every_issue():
    cfg = small_config(m_t=0, M=600, measurement="bernoulli", baselines=["apes"], tau=2.0)
    with pytest.raises(ConfigError) as err:
        cfg.validate()
    assert len(err.value.issues) >= 4


def test_validation_checks_scene_and_music():
    with pytest.raises(ConfigError, match="far field"):
        small_config(targets=[TargetSpec(0.0, range_m=50.0)]).validate()
    with pytest.raises(ConfigError, match="MUSIC"):
        small_config(baselines=["music"]).validate()
    with pytest.raises(ConfigError, match="M <= m_t"):
        small_config(measurement="modified", M=12).validate()


def test_presets():
    names = preset_names()
    for key in ("fig2", "fig4", "fig5", "fig6", "fig7", "fig9", "fig12", "fig13"):
        assert key in names
    fig2 = preset("fig2")[0]
    assert (fig2.n_r, fig2.m_t, fig2.M, fig2.jammer.power, fig2.snr_db, fig2.mu) == (1, 30, 30, 400.0, 0.0, 26.0)
    assert (fig2.grid.angle_min_deg, fig2.grid.angle_max_deg, fig2.grid.angle_step_deg) == (-8.0, 8.0, 0.2)
    fig12 = preset("fig12")[0]
    assert [(t.azimuth_deg, t.speed_mps) for t in fig12.targets] == [(-1.0, 60.0), (0.0, 70.0), (1.0, 80.0)]
    g = fig12.grid
    assert (g.angle_step_deg, g.speed_min_mps, g.speed_max_mps, g.speed_step_mps) == (0.5, 50.0, 110.0, 5.0)
    assert [c.mu for c in preset("fig4")] == [120.0, 190.0, 280.0]
    assert preset("fig5-nr30")[0].mu == 800.0
    for name in names:
        for cfg in preset(name):
            cfg.validate()
    with pytest.raises(ConfigError):
        preset("fig99")


def test_preset_returns_independent_copies():
    a = preset("fig2")[0]
    a.jammer.power = 1.0
    assert preset("fig2")[0].jammer.power == 400.0


def test_truth_cells_on_and_off_grid():
    cfg = preset("fig12")[0]
    params = cfg.radar_params()
    grid = cfg.build_grid(params)
    cells, jam = truth_cells(cfg, grid, params)
    assert len(cells) == 3 and jam is None  # the jammer sits outside the Doppler span
    off = preset("fig13")[0]
    grid13 = off.build_grid(params)
    cells13, _ = truth_cells(off, grid13, params)
    assert len(cells13) == 3
    # off-grid truth is scored at a nearest cell, at most half a step away
    for cell, t in zip(cells13, off.targets):
        assert abs(grid13.angles_deg[cell] - t.azimuth_deg) <= 0.1 + 1e-9


def test_trial_seeds_and_record_fields():
    cfg = small_config(seed=10)
    rec = run_trial(cfg, 3)
    assert rec.seed == 13 and rec.scenario_hash == cfg.scenario_hash()
    assert set(rec.metrics) == {CS, "matched_filter", "capon"}
    assert rec.diagnostics["status"] == "optimal"
    assert rec.wall_ms > 0


def test_zero_trials_gives_header_only_csv(tmp_path):
    res = run_scenario(small_config(trials=0))
    assert res.records == [] and res.summary["trials"] == 0
    paths = emit_results(res, tmp_path)
    with open(paths["trials_cs"]) as fh:
        rows = list(csv.reader(fh))
    assert rows == [trial_header(2)]
    assert read_cdf(paths["cdf_prr_cs"]) == []


def test_serial_and_parallel_runs_agree():
    cfg = small_config(trials=6)
    serial = run_scenario(cfg, workers=1)
    parallel = run_scenario(cfg, workers=3)
    assert summary_json(serial.summary) == summary_json(parallel.summary)
    assert [r.trial for r in parallel.records] == list(range(6))


def test_solver_failure_is_recorded(monkeypatch):
    real = runner.solve_dantzig
    calls = {"n": 0}

    def flaky(problem, config):
        calls["n"] += 1
        if calls["n"] == 2:
            raise FloatingPointError("boom")
        return real(problem, config)

    monkeypatch.setattr(runner, "solve_dantzig", flaky)
    res = run_scenario(small_config(trials=3), workers=1)
    statuses = [r.diagnostics["status"] for r in res.records]
    assert statuses == ["optimal", "error", "optimal"]
    assert res.records[1].metrics[CS] is None
    assert res.summary["solver"]["status_counts"] == {"error": 1, "optimal": 2}
    assert res.summary["methods"][CS]["valid_trials"] == 2


def test_emit_results_files(tmp_path):
    cfg = small_config(trials=3, spectrum_trials=2, tau_sweep=[0.3, 0.6])
    res = run_scenario(cfg, workers=1)
    paths = emit_results(res, tmp_path)
    assert load_summary(paths["summary"]) == json.loads(summary_json(res.summary))
    assert "wall_ms" not in open(paths["summary"]).read()
    with open(paths["trials_cs"]) as fh:
        rows = list(csv.DictReader(fh))
    assert [int(r["trial"]) for r in rows] == [0, 1, 2]
    assert rows[0]["status"] == "optimal" and float(rows[0]["residual_inf_norm"]) <= 8.0 * (1 + 1e-7)
    for key, path in paths.items():
        if key.startswith("cdf_"):
            probs = [p for _, p in read_cdf(path)]
            assert all(b >= a for a, b in zip(probs, probs[1:]))
    with open(paths["spectrum_trial1"]) as fh:
        header = next(csv.reader(fh))
    assert header == ["angle_deg", "doppler_mps", "cs", "matched_filter", "capon"]
    assert "spectrum_trial2" not in paths
    assert res.summary["unavailable_baselines"] == ["apes", "glrt"]
    assert len(res.summary["methods"][CS]["tau_sweep"]) == 2


def test_summary_json_replaces_nan():
    text = summary_json({"a": math.nan, "b": [1.0, math.inf]})
    assert json.loads(text)["a"] is None


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError):
        emit_results(run_scenario(small_config(trials=0)), blocker / "sub")


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv(runner.WORKERS_ENV, "2")
    assert runner.worker_count(10) == 2
    assert runner.worker_count(1) == 1
    monkeypatch.setenv(runner.WORKERS_ENV, "many")
    with pytest.raises(ValueError):
        runner.worker_count(4)
