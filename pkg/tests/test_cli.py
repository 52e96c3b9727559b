import json

import pytest

from csmimo.harness.cli import main
from csmimo.harness.config import preset


def _run(capsys, argv):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_run_preset(tmp_path, capsys):
    code, out, _ = _run(capsys, ["run", "--preset", "fig2", "--trials", "2", "--out", str(tmp_path)])
    assert code == 0
    payload = json.loads(out)
    assert payload["runs"][0]["scenario"] == "fig2"
    assert (tmp_path / "summary.json").exists() and (tmp_path / "spectrum_trial0.csv").exists()


def test_run_config_file_with_overrides(tmp_path, capsys):
    cfg = preset("fig2")[0].replace(trials=5)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg.to_dict()))
    out_dir = tmp_path / "out"
    code, _, _ = _run(capsys, ["run", str(path), "--trials", "1", "--baselines", "none", "--seed", "3",
                               "--out", str(out_dir)])
    assert code == 0
    summary = json.loads((out_dir / "summary.json").read_text())
    assert summary["trials"] == 1 and summary["config"]["seed"] == 3 and list(summary["methods"]) == ["cs"]


def test_run_multi_case_preset_writes_subdirectories(tmp_path, capsys):
    code, out, _ = _run(capsys, ["run", "--preset", "fig5", "--trials", "1", "--baselines", "none",
                                 "--out", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "fig5-nr10" / "summary.json").exists() and (tmp_path / "fig5-nr30" / "summary.json").exists()


@pytest.mark.parametrize("argv", [["run"], ["run", "--preset", "nope"], ["run", "x.json", "--preset", "fig2"],
                                  ["run", "--preset", "fig2", "--trials", "-1"],
                                  ["gridsel", "--threshold", "1.5"]])
def test_config_errors_exit_two(capsys, argv):
    code, _, err = _run(capsys, argv)
    assert code == 2
    assert json.loads(err)["error"]["type"] == "ConfigError"


def test_invalid_config_lists_issues(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"name": "bad", "m_t": 0, "M": 900}))
    code, _, err = _run(capsys, ["run", str(path)])
    assert code == 2
    assert len(json.loads(err)["error"]["issues"]) >= 2


def test_missing_config_file_exits_one(tmp_path, capsys):
    code, _, err = _run(capsys, ["run", str(tmp_path / "missing.json")])
    assert code == 1
    assert json.loads(err)["error"]["type"] == "FileNotFoundError"


def test_sjr_command(tmp_path, capsys):
    code, out, _ = _run(capsys, ["sjr", "--trials", "40", "--out", str(tmp_path)])
    assert code == 0
    payload = json.loads(out)
    assert payload["analytic_gain"] == pytest.approx(512 / 30)
    assert payload["empirical_standard"] > 0 and payload["empirical_modified"] > payload["empirical_standard"]
    assert (tmp_path / "sjr.json").exists()


def test_gridsel_command(capsys):
    code, out, _ = _run(capsys, ["gridsel", "--steps-deg", "0.5,0.05", "--threshold", "0.9"])
    assert code == 0
    payload = json.loads(out)
    assert payload["feasible"] and payload["selected_step_deg"] == pytest.approx(0.05)


def test_correlate_command(capsys):
    code, out, _ = _run(capsys, ["correlate", "--study", "m_t", "--trials", "5"])
    assert code == 0
    assert json.loads(out)["m_t"]["values"] == [5, 15, 45]
