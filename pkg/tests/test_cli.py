import json
from pathlib import Path

import pytest

from cobot.cli import main

DATA = Path(__file__).resolve().parents[1] / "src" / "cobot" / "data"


def test_no_command_prints_help(capsys):
    assert main([]) == 2
    assert "usage" in capsys.readouterr().out.lower()


def test_unknown_subcommand_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
    err = capsys.readouterr().err
    assert err.startswith("error:usage")


def test_analyze_trials_published_table(capsys):
    assert main(["analyze", "trials", str(DATA / "table1_counts.csv")]) == 0
    out = capsys.readouterr().out
    assert "recognition rate: 0.7525" in out
    payload = json.loads(out[out.index("{"):])
    assert payload["recognition_rate"] == pytest.approx(0.7525, abs=1e-9)


def test_analyze_trials_missing_file(capsys):
    assert main(["analyze", "trials", "missing.csv"]) == 1
    err = capsys.readouterr().err
    assert err.splitlines()[0] == "error:file_error"


def test_analyze_trials_per_subject_log(tmp_path, capsys):
    import numpy as np

    rng = np.random.default_rng(6)
    rows = ["subject,actual,perceived,response_time_s"]
    for s in range(7):
        for p in range(1, 9):
            for r in range(5):
                perceived = p if rng.random() < 0.6 + 0.04 * p else int(rng.integers(1, 9))
                rows.append(f"s{s},{p},{perceived},1.5")
    path = tmp_path / "trials.csv"
    path.write_text("\n".join(rows) + "\n")
    assert main(["analyze", "trials", str(path)]) == 0
    out = capsys.readouterr().out
    payload = json.loads(out[out.index("{"):])
    assert payload["mode"] == "trials"
    assert payload["trials"] == 280
    assert payload["anova_oneway"]["df"] == [7, 48]
    assert payload["anova_repeated_measures"]["df"] == [7, 42]
    assert len(payload["paired_ttests"]) <= 28


def test_analyze_tlx(capsys):
    assert main(["analyze", "tlx", str(DATA / "tlx_means.csv")]) == 0
    out = capsys.readouterr().out
    assert "Raw TLX Score" in out
    payload = json.loads(out[out.index("{"):])
    assert payload["overall_raw_mean"] == pytest.approx(1.555, abs=1e-9)


def test_patterns_export(tmp_path, capsys):
    out_path = tmp_path / "patterns.json"
    assert main(["patterns", "export", "--out", str(out_path)]) == 0
    patterns = json.loads(out_path.read_text())
    assert len(patterns) == 8
    assert sorted(p["id"] for p in patterns) == list(range(1, 9))


def test_run_empty_scenario_and_verify(tmp_path, capsys):
    scenario = tmp_path / "empty.json"
    scenario.write_text(json.dumps({"name": "empty", "seed": 0, "steps": [
        {"action": "wait", "s": 0.1},
    ]}))
    log_path = tmp_path / "log.jsonl"
    report_path = tmp_path / "report.json"
    assert main(["run", str(scenario), "--log", str(log_path),
                 "--report", str(report_path)]) == 0
    report = json.loads(report_path.read_text())
    assert report["task_completed"] is False
    assert report["press_event_count"] == 0

    assert main(["verify", str(log_path)]) == 0
    out = capsys.readouterr().out
    assert report["determinism_digest"] in out


def test_run_failing_assert_exits_1(tmp_path, capsys):
    scenario = tmp_path / "bad.json"
    scenario.write_text(json.dumps({"name": "bad", "seed": 0, "steps": [
        {"action": "wait", "s": 0.1},
        {"action": "assert", "topic": "robot/state", "path": "gripper.opening_mm",
         "op": "==", "value": 1.0},
    ]}))
    assert main(["run", str(scenario)]) == 1
    err = capsys.readouterr().err
    assert err.splitlines()[0] == "error:assertion_failed"
    assert "gripper.opening_mm" in err


def test_replay_cli_round_trip(tmp_path, capsys):
    scenario = tmp_path / "s.json"
    scenario.write_text(json.dumps({"name": "s", "seed": 3, "steps": [
        {"action": "press_button", "button": 1, "hold_s": 0.2},
    ]}))
    log_path = tmp_path / "log.jsonl"
    assert main(["run", str(scenario), "--log", str(log_path)]) == 0
    capsys.readouterr()
    out_path = tmp_path / "replayed.jsonl"
    assert main(["replay", str(log_path), "--out", str(out_path)]) == 0
    result = json.loads(capsys.readouterr().out)
    assert result["digests_equal"] is True
    assert out_path.exists()


def test_verify_corrupt_log_exits_1(tmp_path, capsys):
    scenario = tmp_path / "s.json"
    scenario.write_text(json.dumps({"name": "s", "seed": 3, "steps": [
        {"action": "press_button", "button": 1, "hold_s": 0.1},
    ]}))
    log_path = tmp_path / "log.jsonl"
    main(["run", str(scenario), "--log", str(log_path)])
    capsys.readouterr()
    lines = log_path.read_text().splitlines()
    del lines[len(lines) // 2]
    log_path.write_text("\n".join(lines) + "\n")
    assert main(["verify", str(log_path)]) == 1
    err = capsys.readouterr().err
    assert err.splitlines()[0] == "error:log_corruption"


def test_bundled_scenario_resolves(capsys):
    # resolved by name, no path needed; seed override exercises --seed
    scenario_arg = "pour_two_containers"
    code = main(["--seed", "7", "run", scenario_arg])
    out = capsys.readouterr().out
    assert code == 0
    report = json.loads(out[out.index("{"):])
    assert report["task_completed"] is True
