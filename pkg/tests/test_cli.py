"""Command-line interface: subcommands, exit codes, output files."""

import json
import subprocess
import sys
from pathlib import Path

import pytest

from termnet.cli import main
from termnet.criteria import Schedule
from termnet.faults import FaultScript
from termnet.graph import make_topology
from termnet.scenario_io import save_scenario
from termnet.sim import Scenario

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"
RING8_BASIC = str(SCENARIO_DIR / "ring8_basic.json")
RING8_FAULTY = str(SCENARIO_DIR / "ring8_faulty.json")


def test_run_writes_report_series_and_trace(tmp_path, capsys):
    code = main(["run", RING8_BASIC, "--out", str(tmp_path)])
    assert code == 0
    report = json.loads((tmp_path / "ring8-basic.report.json").read_text())
    assert report["common_stop"] == 35
    assert report["checks"]
    series = (tmp_path / "ring8-basic.series.csv").read_text().splitlines()
    assert series[0] == "iteration,locally_satisfied,full_vector,terminated"
    assert len(series) == 1 + report["iterations_run"]
    assert (tmp_path / "ring8-basic.trace.csv").exists()
    out = capsys.readouterr().out
    assert "terminated simultaneously at iteration 35" in out


def test_run_outputs_are_deterministic(tmp_path):
    names = ("ring8-faulty2.report.json", "ring8-faulty2.series.csv",
             "ring8-faulty2.trace.csv")
    assert main(["run", RING8_FAULTY, "--out", str(tmp_path)]) == 0
    first = {name: (tmp_path / name).read_bytes() for name in names}
    assert main(["run", RING8_FAULTY, "--out", str(tmp_path)]) == 0
    for name in names:
        assert (tmp_path / name).read_bytes() == first[name], name


def test_run_no_trace_and_jsonl_trace(tmp_path):
    assert main(["run", RING8_BASIC, "--out", str(tmp_path), "--no-trace"]) == 0
    assert not list(tmp_path.glob("*.trace.*"))
    assert main(["run", RING8_BASIC, "--out", str(tmp_path),
                 "--trace-format", "jsonl"]) == 0
    trace = tmp_path / "ring8-basic.trace.jsonl"
    assert trace.exists()
    json.loads(trace.read_text().splitlines()[0])


def test_run_execution_override_matches_default(tmp_path):
    assert main(["run", RING8_FAULTY, "--out", str(tmp_path / "v")]) == 0
    assert main(["run", RING8_FAULTY, "--out", str(tmp_path / "s"),
                 "--execution", "serial"]) == 0
    a = json.loads((tmp_path / "v" / "ring8-faulty2.report.json").read_text())
    b = json.loads((tmp_path / "s" / "ring8-faulty2.report.json").read_text())
    assert b["execution"] == "serial"
    assert a["stop_iterations"] == b["stop_iterations"]


def test_run_respects_output_dir_env(tmp_path, monkeypatch):
    monkeypatch.setenv("TERMNET_OUTPUT_DIR", str(tmp_path / "from-env"))
    assert main(["run", RING8_BASIC, "--no-trace"]) == 0
    assert (tmp_path / "from-env" / "ring8-basic.report.json").exists()


def test_run_missing_file_is_invalid(tmp_path, capsys):
    assert main(["run", str(tmp_path / "nope.json")]) == 2
    assert "error:" in capsys.readouterr().err


def test_run_exhausted_without_check_failures_exits_3(tmp_path, capsys):
    # corruption overlapping the stopping phase livelocks the run; the
    # safety checks still pass, so the budget exit is reported as such
    scenario = Scenario(
        graph=make_topology("path", 6),
        criterion=Schedule.from_times((32, 1, 17, 22, 29, 12)),
        method="fault_tolerant",
        faults=(FaultScript(agent=4, windows=((6, 15), (37, 48)),
                            subjects=(1, 5), stamp_mode="freeze"),
                FaultScript(agent=5, windows=((33, 37), (45, 55)),
                            subjects=(1,), stamp_mode="fresh")),
        max_iterations=400, name="livelock")
    path = tmp_path / "livelock.json"
    save_scenario(scenario, path)
    code = main(["run", str(path), "--out", str(tmp_path), "--no-trace"])
    assert code == 3
    assert "budget 400 exhausted" in capsys.readouterr().out


def test_run_failed_check_exits_4(tmp_path, capsys):
    # a clean run cut off before its guaranteed stop fails the stop check
    scenario = Scenario(
        graph=make_topology("ring", 6),
        criterion=Schedule.from_times((3, 9, 4, 7, 2, 5)),
        method="fault_tolerant", max_iterations=15, name="short")
    path = tmp_path / "short.json"
    save_scenario(scenario, path)
    code = main(["run", str(path), "--out", str(tmp_path), "--no-trace"])
    assert code == 4
    assert "[FAIL] ft_exact_stop" in capsys.readouterr().out


def test_validate_ok(capsys):
    assert main(["validate", RING8_FAULTY]) == 0
    assert "ok:" in capsys.readouterr().out


def test_validate_rejects_malformed_file(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert main(["validate", str(path)]) == 2
    assert "invalid:" in capsys.readouterr().err


def test_gen_topology_stdout(capsys):
    assert main(["gen-topology", "ring", "6"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["agent_count"] == 6
    assert data["diameter"] == 3
    assert len(data["edges"]) == 6


def test_gen_topology_out_file(tmp_path):
    path = tmp_path / "g.json"
    assert main(["gen-topology", "random_diameter", "22", "--edge-prob",
                 "0.08", "--seed", "0", "--diameter", "7",
                 "--out-file", str(path)]) == 0
    data = json.loads(path.read_text())
    assert data["agent_count"] == 22 and data["diameter"] == 7


def test_gen_topology_impossible_request(capsys):
    assert main(["gen-topology", "random_diameter", "3", "--diameter", "9"]) == 2
    assert "error:" in capsys.readouterr().err


def test_find_tight_writes_witness(tmp_path, capsys):
    assert main(["find-tight", "5", "2", "--out", str(tmp_path)]) == 0
    blob = json.loads((tmp_path / "tight_witness.json").read_text())
    assert blob["persistence"] == blob["bound"] == 5
    assert "reaches persistence 5" in capsys.readouterr().out


def test_find_tight_budget_exhausted(capsys):
    assert main(["find-tight", "3", "3", "--budget", "20"]) == 5
    assert "no witness" in capsys.readouterr().out


def test_campaign_command(tmp_path, capsys):
    assert main(["campaign", "--out", str(tmp_path)]) == 0
    blob = json.loads((tmp_path / "campaign.json").read_text())
    assert len(blob["rows"]) == 7
    assert {r["common_stop"] for r in blob["rows"][1:]} == {897}
    out = capsys.readouterr().out
    assert "897" in out and "869" in out


def test_campaign_skip_basic(tmp_path):
    assert main(["campaign", "--out", str(tmp_path), "--skip-basic"]) == 0
    blob = json.loads((tmp_path / "campaign.json").read_text())
    assert len(blob["rows"]) == 6
    assert all(r["method"] == "fault_tolerant" for r in blob["rows"])


def test_console_script_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "termnet.cli", "validate", RING8_BASIC],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert "ok:" in proc.stdout
