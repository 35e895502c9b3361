"""
Command line frontend: parses a RunSpec, runs one computation through SetpointLab and writes CSV or JSON.

Usage: setpoint-lab <command> [--key value ...] [--config file.json] [--format csv|json] [--output path]
"""

import argparse
import csv
import io
import json
import logging
import math
import sys
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np

from config.defaults import EXIT_IO, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, FLOAT_DIGITS
from setpointlib.core import SetpointLab
from src.logger_config import get_console_logger
from src.loop_exception import UsageError
from utils.loop_state import ConvergenceTable, Trajectory
from utils.map_state import BoundsRow, StabilityReport
from utils.orbit_state import OrbitSummary, ScanResult
from utils.run_spec import COMMANDS, FORMATS, PARAMETER_KINDS, RunSpec, coerce

logger = logging.getLogger(__name__)

TRAJECTORY_COLUMNS = ("step", "t", "Q", "lambda", "N", "dN", "delta_t_est", "delta_n_est", "event")


class _Parser(argparse.ArgumentParser):
    """ argparse that raises UsageError instead of exiting """

    def error(self, message: str):
        key = "argv"
        for token in message.split():
            if token.startswith("--"):
                key = token.strip(",'\"").lstrip("-")
                break
        raise UsageError(key, message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="setpoint-lab", description="Setpoint algorithms, closed-loop maps and bifurcations")
    subparsers = parser.add_subparsers(dest="command", metavar="command")
    for command in COMMANDS:
        sub = subparsers.add_parser(command)
        for key, kind in PARAMETER_KINDS.items():
            if kind is bool:
                sub.add_argument(f"--{key}", dest=key, action="store_true", default=argparse.SUPPRESS)
            else:
                sub.add_argument(f"--{key}", dest=key, default=argparse.SUPPRESS)
        sub.add_argument("--config", dest="_config", default=None, help="flat JSON object of the same keys")
        sub.add_argument("--format", dest="_format", default=None, choices=FORMATS)
        sub.add_argument("--output", dest="_output", default=None, help="file path, standard output if omitted")
        sub.add_argument("--verbose", dest="_verbose", action="store_true")
    return parser


def _read_config(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as f:
        try:
            content = json.load(f)
        except json.JSONDecodeError as e:
            raise UsageError("config", f"not valid JSON: {e}")
    if not isinstance(content, dict):
        raise UsageError("config", "must be a flat JSON object")
    return content


def parse_args(argv: Sequence[str]) -> RunSpec:
    """
    Builds a RunSpec from command line arguments. Config-file values are read first and flags override them.

    Raises:
        UsageError: Empty argv, unknown flag or key, missing required key or non-finite value.
    """
    if not argv:
        raise UsageError("command", "missing command, expected one of " + ", ".join(COMMANDS))
    namespace = vars(_build_parser().parse_args(list(argv)))
    command = namespace.pop("command")
    if command is None:
        raise UsageError("command", "missing command")
    config_path = namespace.pop("_config")
    output_format = namespace.pop("_format")
    output_path = namespace.pop("_output")
    verbose = namespace.pop("_verbose")

    raw = {}
    if config_path is not None:
        file_values = _read_config(config_path)
        output_format = output_format or file_values.pop("format", None)
        output_path = output_path or file_values.pop("output", None)
        verbose = verbose or bool(file_values.pop("verbose", False))
        raw.update(file_values)
    raw.update(namespace)
    parameters = {key: coerce(key, value) for key, value in raw.items()}
    return RunSpec(command=command, parameters=parameters, output_path=output_path,
                   format=output_format or "csv", verbose=verbose)


def _number(value: Any) -> Any:
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


def _float_text(value: float) -> str:
    return format(value, f".{FLOAT_DIGITS}g")


def _period(value: Any) -> Any:
    return int(value) if isinstance(value, (int, np.integer)) else value


def _trajectory_rows(trajectory: Trajectory) -> List[list]:
    return [[r.step, r.t, r.Q, r.lam, r.N, r.dN, r.delta_t_est, r.delta_N_est, r.event]
            for r in trajectory.records]


def _scan_rows(result: ScanResult) -> List[list]:
    rows = []
    for cell in result.cells:
        if len(cell.samples) == 0:
            rows.append([cell.param, math.nan, _period(cell.period), cell.lyapunov] +
                        ([math.nan] if cell.samples.shape[1] > 1 else []))
            continue
        for sample in cell.samples:
            rows.append([cell.param, _number(sample[0]), _period(cell.period), cell.lyapunov] +
                        [_number(v) for v in sample[1:]])
    return rows


def _tabulate(result: Any) -> Tuple[tuple, List[list]]:
    """ Header and rows for the CSV form of a result """
    if isinstance(result, Trajectory):
        return TRAJECTORY_COLUMNS, _trajectory_rows(result)
    if isinstance(result, ScanResult):
        header = ("param", "sample_value", "period", "lyapunov")
        if result.cells and result.cells[0].samples.ndim == 2 and result.cells[0].samples.shape[1] > 1:
            header += ("sample_lambda",)
        return header, _scan_rows(result)
    if isinstance(result, OrbitSummary):
        header = ("iteration", "Q") if result.samples.shape[1] == 1 else ("iteration", "Q", "lambda")
        return header, [[i] + [_number(v) for v in row] for i, row in enumerate(result.samples)]
    if isinstance(result, ConvergenceTable):
        header = ("dt", "steady_Q", "reference_Q", "steady_error", "map_residual", "settled_at", "note")
        return header, [[row.to_dict()[key] for key in header] for row in result.rows]
    if isinstance(result, list) and all(isinstance(row, BoundsRow) for row in result):
        header = ("a", "q_min", "q_max", "Q_min", "Q_max", "lambda_min", "lambda_max")
        return header, [[row.to_dict()[key] for key in header] for row in result]
    if isinstance(result, dict):
        return ("field", "value"), [[key, json.dumps(value) if isinstance(value, (dict, list)) else value]
                                    for key, value in result.items()]
    raise TypeError(f"cannot tabulate {type(result).__name__}")


def _as_json(result: Any) -> Any:
    if isinstance(result, Trajectory):
        return {
            "records": [dict(zip(TRAJECTORY_COLUMNS, row)) for row in _trajectory_rows(result)],
            "events": list(result.events),
            "truncated": result.truncated,
        }
    if isinstance(result, ScanResult):
        return {
            "parameter_grid": [float(v) for v in result.parameter_grid],
            "cells": [{
                "param": cell.param,
                "period": _period(cell.period),
                "lyapunov": cell.lyapunov,
                "error": cell.error,
                "samples": cell.samples.tolist(),
            } for cell in result.cells],
            "flip_points": list(result.flip_points),
            "chaos_onset": result.chaos_onset,
        }
    if isinstance(result, OrbitSummary):
        return {
            "period": _period(result.period),
            "lyapunov": result.lyapunov,
            "lyapunov_reliable": result.lyapunov_reliable,
            "underflow_events": result.underflow_events,
            "bounds": result.bounds.tolist(),
            "samples": result.samples.tolist(),
        }
    if isinstance(result, ConvergenceTable):
        return result.to_dict()
    if isinstance(result, list):
        return [row.to_dict() for row in result]
    return result


def emit(result: Any, spec: RunSpec) -> str:
    """
    Serializes a result as CSV (header row, LF line endings) or JSON. CSV floats carry FLOAT_DIGITS
    significant digits, enough to read back the same double.
    """
    if spec.format == "json":
        return json.dumps(_as_json(result), indent=2) + "\n"
    header, rows = _tabulate(result)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if value is None else _float_text(value) if isinstance(value, float) else value
                         for value in row])
    return buffer.getvalue()


def _stability_result(lab: SetpointLab, spec: RunSpec) -> dict:
    report: StabilityReport = lab.stability()
    result = report.to_dict()
    if spec.get("map") == "map2":
        result["zero_point"] = lab.zero_point_stability().to_dict()
    return result


def _write(text: str, path: Optional[str]):
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """ Runs one command and returns the process exit code """
    argv = sys.argv[1:] if argv is None else list(argv)
    console = get_console_logger()
    try:
        spec = parse_args(argv)
    except UsageError as e:
        _build_parser().print_usage(sys.stderr)
        console.error("usage error: %s", e)
        return EXIT_USAGE
    except OSError as e:
        console.error("cannot read config: %s", e)
        return EXIT_IO
    console = get_console_logger(logging.DEBUG if spec.verbose else logging.INFO)
    logger.debug("running %s with %s", spec.command, spec.parameters)

    lab = SetpointLab(spec.parameters)
    try:
        result = _stability_result(lab, spec) if spec.command == "stability" else lab.run(spec.command)
        _write(emit(result, spec), spec.output_path)
    except OSError as e:
        console.error("I/O error: %s", e)
        return EXIT_IO
    except ArithmeticError as e:
        console.error("numerical failure: %s", e)
        return EXIT_NUMERIC
    except ValueError as e:
        console.error("usage error: %s", e)
        return EXIT_USAGE
    if isinstance(result, Trajectory) and result.truncated:
        console.error("run truncated: %s", "; ".join(result.events))
        return EXIT_NUMERIC
    return EXIT_OK
