import csv
import io
import json

import pytest

from setpointlib import SetpointLab
from src import cli
from src.loop_exception import UsageError
from utils.run_spec import RunSpec

REFERENCE_FLAGS = ["--lambda-tilde", "4", "--q-setpoint", "1", "--delta-n", "0.2", "--delta-t", "0.25",
                   "--delta-n-tilde", "0.5"]
SIMULATE = ["simulate", "--algorithm", "2", "--dt", "1", "--q0", "2", "--steps", "500"] + REFERENCE_FLAGS


def test_parse_reference_simulation():
    spec = cli.parse_args(SIMULATE)
    assert spec.command == "simulate"
    assert spec.parameters["dt"] == 1.0
    assert spec.parameters["steps"] == 500
    assert spec.parameters["algorithm"] == "2"
    assert spec.format == "csv"
    assert spec.output_path is None


def test_parse_scan():
    spec = cli.parse_args(["scan", "--map", "reduced", "--from", "1.5", "--to", "2.85", "--cells", "270"])
    assert spec.parameters == {"map": "reduced", "from": 1.5, "to": 2.85, "cells": 270}


@pytest.mark.parametrize("argv,key", [
    ([], "command"),
    (SIMULATE + ["--bogus", "1"], "bogus"),
    (SIMULATE[:-2] + ["--dt", "nan"], "dt"),
    (["simulate", "--algorithm", "2", "--dt", "1"], "lambda-tilde"),
])
def test_usage_errors_name_the_key(argv, key):
    with pytest.raises(UsageError) as info:
        cli.parse_args(argv)
    assert info.value.key == key


def test_flags_override_config_file(tmp_path):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"dt": 2.0, "steps": 10, "format": "json"}), encoding="utf-8")
    spec = cli.parse_args(SIMULATE[:1] + ["--config", str(config), "--algorithm", "1", "--q0", "2", "--dt", "1"] +
                          REFERENCE_FLAGS)
    assert spec.parameters["dt"] == 1.0
    assert spec.parameters["steps"] == 10
    assert spec.format == "json"


def test_unknown_config_key(tmp_path):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"wobble": 1}), encoding="utf-8")
    with pytest.raises(UsageError) as info:
        cli.parse_args(["bounds", "--a", "2.7", "--config", str(config)])
    assert info.value.key == "wobble"


def test_empty_argv_exits_with_usage(capsys):
    assert cli.main([]) == 2
    assert "usage" in capsys.readouterr().err


def test_trajectory_csv_has_header_and_records():
    spec = RunSpec("simulate", {"algorithm": "2", "dt": 1.0, "q0": 2.0, "steps": 2, "lambda-tilde": 4.0,
                                "q-setpoint": 1.0, "delta-n": 0.2, "delta-t": 0.25, "delta-n-tilde": 0.5})
    text = cli.emit(SetpointLab(spec.parameters).simulate(), spec)
    lines = text.split("\n")
    assert text.endswith("\n")
    assert "\r" not in text
    assert len(lines) == 5 and lines[-1] == ""
    assert lines[0] == "step,t,Q,lambda,N,dN,delta_t_est,delta_n_est,event"


def test_json_round_trip_is_exact():
    spec = RunSpec("simulate", {"algorithm": "1", "dt": 0.7, "q0": 0.3, "steps": 25, "lambda-tilde": 1.0,
                                "q-setpoint": 1.0, "delta-n": 0.2, "delta-t": 0.1534, "delta-n-tilde": 0.3},
                   format="json")
    trajectory = SetpointLab(spec.parameters).simulate()
    loaded = json.loads(cli.emit(trajectory, spec))
    for record, row in zip(trajectory.records, loaded["records"]):
        assert row["Q"] == record.Q
        assert row["lambda"] == record.lam
        assert row["t"] == record.t


def test_output_is_deterministic():
    spec = RunSpec("orbit", {"map": "reduced", "a": 2.7, "transient": 100, "samples": 50})
    first = cli.emit(SetpointLab(spec.parameters).orbit(), spec)
    second = cli.emit(SetpointLab(spec.parameters).orbit(), spec)
    assert first == second


def test_scan_json_contains_flips():
    spec = RunSpec("scan", {"map": "reduced", "from": 1.8, "to": 2.2, "cells": 4, "transient": 3000,
                            "samples": 64}, format="json")
    payload = json.loads(cli.emit(SetpointLab(spec.parameters).scan(), spec))
    assert payload["flip_points"] == [pytest.approx(2.0)]
    assert [cell["period"] for cell in payload["cells"]] == [1, 1, 2, 2]


def test_stability_command_writes_critical_step(tmp_path):
    out = tmp_path / "stability.json"
    argv = ["stability", "--map", "map2", "--dt", "1", "--format", "json", "--output", str(out)] + REFERENCE_FLAGS
    assert cli.main(argv) == 0
    payload = json.loads(out.read_text(encoding="utf-8"))
    assert payload["critical_dt"] == pytest.approx(1.65685, abs=1e-5)
    assert payload["stable"] is True
    assert payload["zero_point"]["stable"] is False


def test_bounds_table(tmp_path):
    out = tmp_path / "bounds.csv"
    assert cli.main(["bounds", "--from", "2.1", "--to", "2.8", "--cells", "8", "--output", str(out)]) == 0
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("a,q_min,q_max")
    assert len(lines) == 9
    rows = SetpointLab({"a": 2.7}).bounds()
    assert rows[0].q_max == pytest.approx(2.027391, rel=1e-3)


def test_unwritable_output_is_an_io_error(tmp_path):
    argv = ["bounds", "--a", "2.7", "--output", str(tmp_path / "missing" / "bounds.csv")]
    assert cli.main(argv) == 4


def test_numerical_failure_exit_code(tmp_path):
    argv = ["simulate", "--algorithm", "2", "--dt", "1", "--q0", "2", "--steps", "20", "--lambda-tilde", "4",
            "--q-setpoint", "1", "--delta-n", "0.2", "--delta-t", "0.25", "--delta-n-tilde", "-0.5",
            "--output", str(tmp_path / "run.csv")]
    assert cli.main(argv) == 3


def test_facade_rejects_unknown_names():
    with pytest.raises(UsageError):
        SetpointLab({"map": "logistic"}).orbit()
    with pytest.raises(UsageError):
        SetpointLab({}).run("plot")


def test_csv_floats_read_back_exactly():
    spec = RunSpec("simulate", {"algorithm": "1", "dt": 0.7, "q0": 0.3, "steps": 25, "lambda-tilde": 1.0,
                                "q-setpoint": 1.0, "delta-n": 0.2, "delta-t": 0.1534, "delta-n-tilde": 0.3})
    trajectory = SetpointLab(spec.parameters).simulate()
    rows = list(csv.DictReader(io.StringIO(cli.emit(trajectory, spec))))
    assert len(rows) == len(trajectory.records)
    for record, row in zip(trajectory.records, rows):
        assert float(row["Q"]) == record.Q
        assert float(row["lambda"]) == record.lam
        assert float(row["t"]) == record.t
    assert rows[1]["t"] == "0.69999999999999996"
