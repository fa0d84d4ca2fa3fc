"""Command line front end: single estimates, table reproduction and eta sweeps."""

from __future__ import annotations

import argparse
import asyncio
import csv
import json
import logging
import os
import sys
import tempfile
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .config import build_risk_config, load_config_file
from .const import (
    CONF_BASE_SEED,
    CONF_CLAMP_NONNEG,
    CONF_ESTIMATOR,
    CONF_ETA,
    CONF_EXAMPLE,
    CONF_FX_KNOWN,
    CONF_HEAVY_TAILED,
    CONF_N,
    CONF_QUADRATURE_POINTS,
    CONF_REPLICATIONS,
    CONF_STRICT_GRID,
    CONF_X,
    CSV_FLOAT_FORMAT,
    CURVE_FILENAME,
    DEFAULT_CURVE_GRID_POINTS,
    DEFAULT_SWEEP_ETAS,
    ESTIMATORS,
    MANIFEST_FILENAME,
    SWEEP_FILENAME,
    TABLE_FILENAME,
    TABLE_HEADER,
    TRACE_FILENAME,
)
from .evaluation import RiskConfig, RiskReport, TrueDensityCurve, async_run_cells, estimate_once
from .exceptions import ConditionalDensityError, ConfigurationError, EvaluationError, UsageError
from .presets import PRESETS, preset_cells
from .sampling import ExampleId, conditional_window

_LOGGER = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

CELL_KEYS = (CONF_EXAMPLE, CONF_ESTIMATOR, CONF_X, CONF_N, CONF_ETA, CONF_FX_KNOWN)


def _number(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return CSV_FLOAT_FORMAT.format(value)
    if isinstance(value, ExampleId):
        return value.value
    return str(value)


class OutputWriter:
    """Writes output files atomically and removes them all if the run fails."""

    def __init__(self, directory: Path):
        """Initialize the writer."""
        self.directory = directory
        self.written: List[Path] = []

    def write(self, name: str, text: str) -> Path:
        """Write a file through a temporary file and os.replace."""
        self.directory.mkdir(parents=True, exist_ok=True)
        target = self.directory / name
        handle = tempfile.NamedTemporaryFile(
            "w", encoding="utf-8", dir=self.directory, prefix=f".{name}.", delete=False, newline=""
        )
        try:
            with handle:
                handle.write(text)
            os.replace(handle.name, target)
        except OSError:
            Path(handle.name).unlink(missing_ok=True)
            raise
        self.written.append(target)
        _LOGGER.debug("Wrote %s", target)
        return target

    def discard(self) -> None:
        """Remove every file written so far."""
        for path in self.written:
            path.unlink(missing_ok=True)
        self.written.clear()


def _manifest(command: str, configs: Sequence[RiskConfig], outputs: Sequence[str]) -> str:
    lines = [
        f"command = {command}",
        f"version = {__version__}",
        f"outputs = {', '.join(outputs)}",
        f"cells = {len(configs)}",
    ]
    for index, cfg in enumerate(configs, start=1):
        settings = " ".join(f"{key}={_number(value)}" for key, value in cfg.as_dict().items())
        lines.append(f"cell[{index}] = {settings}")
        lines.append(f"seeds[{index}] = {cfg.seeds[0]}..{cfg.seeds[-1]}")
    return "\n".join(lines) + "\n"


def _csv_text(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(_number(value) for value in row) for row in rows)
    return "\n".join(lines) + "\n"


def _flag_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """Configuration keys given on the command line."""
    return {
        CONF_EXAMPLE: args.example,
        CONF_ESTIMATOR: args.estimator,
        CONF_X: args.x,
        CONF_N: args.n,
        CONF_ETA: args.eta,
        CONF_FX_KNOWN: args.fx_known,
        CONF_HEAVY_TAILED: args.heavy_tailed,
        CONF_REPLICATIONS: args.reps,
        CONF_BASE_SEED: args.seed,
        CONF_QUADRATURE_POINTS: args.quadrature_points,
        CONF_STRICT_GRID: args.strict_grid,
        CONF_CLAMP_NONNEG: args.clamp_nonneg,
    }


def _file_mapping(args: argparse.Namespace) -> Dict[str, Any]:
    return load_config_file(args.config) if args.config else {}


def _resolve(mapping: Dict[str, Any], overrides: Dict[str, Any]) -> RiskConfig:
    try:
        return build_risk_config(mapping, **overrides)
    except ConfigurationError as err:
        raise UsageError(f"Invalid configuration: {err}") from err


def cmd_estimate(args: argparse.Namespace, writer: OutputWriter) -> None:
    """One pipeline pass: the selected curve on a y grid plus the selection trace."""
    cfg = _resolve(_file_mapping(args), _flag_overrides(args))
    if args.grid_points < 2:
        raise UsageError("--grid-points must be at least 2")
    result = estimate_once(cfg, cfg.base_seed)

    low, high = conditional_window(cfg.example, cfg.x, cfg.heavy_tailed)
    ys = np.linspace(low, high, args.grid_points)
    columns = [ys, result.curve.evaluate(ys)]
    header = ["y", "f_hat"]
    if args.truth:
        columns.append(TrueDensityCurve(cfg.example, cfg.x, cfg.heavy_tailed).evaluate(ys))
        header.append("f_true")
    table = np.column_stack(columns)
    if not np.all(np.isfinite(table)):
        raise EvaluationError("Estimated curve has non-finite values on the output grid")
    rows = ["\t".join(header)]
    rows.extend("\t".join(CSV_FLOAT_FORMAT.format(value) for value in row) for row in table)

    marginal = result.marginal
    trace = {
        "example": cfg.example.value,
        "estimator": cfg.estimator,
        "x": cfg.x,
        "seed": result.seed,
        "marginal": {
            "known": marginal.known,
            "delta_hat": marginal.delta_hat,
            "sup_hat": marginal.sup_hat,
            "bandwidth_h0": marginal.selected_bandwidth_h0,
        },
        "selection": result.trace.as_dict(),
    }
    writer.write(CURVE_FILENAME, "\n".join(rows) + "\n")
    writer.write(TRACE_FILENAME, json.dumps(trace, indent=2, sort_keys=True) + "\n")
    writer.write(MANIFEST_FILENAME, _manifest("estimate", [cfg], [CURVE_FILENAME, TRACE_FILENAME]))


def _read_cells(path: str) -> List[Dict[str, Any]]:
    try:
        with open(path, newline="", encoding="utf-8") as handle:
            reader = csv.DictReader(handle)
            missing = [key for key in CELL_KEYS if key not in (reader.fieldnames or [])]
            if missing:
                raise UsageError(f"Cell file {path} lacks columns: {', '.join(missing)}")
            return [{key: row[key] for key in CELL_KEYS} for row in reader]
    except OSError as err:
        raise UsageError(f"Cannot read cell file {path}: {err}") from err


def _table_configs(args: argparse.Namespace) -> List[RiskConfig]:
    mapping = _file_mapping(args)
    shared = {key: value for key, value in _flag_overrides(args).items() if key not in CELL_KEYS}
    if args.preset:
        if args.preset.lower() not in PRESETS:
            raise UsageError(f"Unknown preset {args.preset!r}; expected one of {', '.join(sorted(PRESETS))}")
        cells = [{key: cfg.as_dict()[key] for key in CELL_KEYS} for cfg in preset_cells(args.preset)]
    elif args.cells:
        cells = _read_cells(args.cells)
    else:
        raise UsageError("table needs --preset or --cells")
    if not cells:
        raise UsageError("The cell list is empty")
    return [_resolve({**mapping, **cell}, shared) for cell in cells]


def _run_cells(configs: Sequence[RiskConfig], workers: Optional[int]) -> List[RiskReport]:
    return asyncio.run(async_run_cells(configs, max_workers=workers))


def cmd_table(args: argparse.Namespace, writer: OutputWriter) -> None:
    """MSE of every cell of a preset or cell file."""
    configs = _table_configs(args)
    reports = _run_cells(configs, args.workers)
    rows = [
        (
            report.config.example,
            report.config.estimator,
            float(report.config.x),
            report.config.n,
            float(report.config.eta),
            report.config.fx_known,
            report.mse_mean,
            report.mse_stderr,
            report.replications,
            report.config.base_seed,
        )
        for report in reports
    ]
    writer.write(TABLE_FILENAME, _csv_text(TABLE_HEADER, rows))
    writer.write(MANIFEST_FILENAME, _manifest("table", configs, [TABLE_FILENAME]))


def cmd_sweep(args: argparse.Namespace, writer: OutputWriter) -> None:
    """MSE of one cell for each eta, ascending in eta."""
    etas = sorted(set(args.etas))
    mapping = _file_mapping(args)
    overrides = _flag_overrides(args)
    configs = [_resolve(mapping, {**overrides, CONF_ETA: eta}) for eta in etas]
    reports = _run_cells(configs, args.workers)
    rows = [(float(r.config.eta), r.mse_mean, r.mse_stderr, r.replications) for r in reports]
    writer.write(SWEEP_FILENAME, _csv_text(("eta", "mse_mean", "mse_stderr", "N"), rows))
    writer.write(MANIFEST_FILENAME, _manifest("sweep", configs, [SWEEP_FILENAME]))


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat YAML file of key: value settings")
    parser.add_argument("--example", help="ex1, ex2, ex3 or ex4")
    parser.add_argument("--estimator", choices=ESTIMATORS)
    parser.add_argument("--x", type=float, help="point at which f(x, .) is estimated")
    parser.add_argument("--n", type=int, help="sample size of each half")
    parser.add_argument("--eta", type=float, help="penalty tuning constant")
    parser.add_argument("--fx-known", action="store_true", default=None, help="use the true design density")
    parser.add_argument(
        "--heavy-tailed", action="store_true", default=None, help="Cauchy response noise (Example 1 only)"
    )
    parser.add_argument("--reps", type=int, help="Monte Carlo replications")
    parser.add_argument("--seed", type=int, help="seed (estimate) or base seed (table, sweep)")
    parser.add_argument("--quadrature-points", type=int)
    parser.add_argument("--strict-grid", action="store_true", default=None, help="theoretical bandwidth bounds")
    parser.add_argument("--clamp-nonneg", action="store_true", default=None, help="clamp kernel curves at zero")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--workers", type=int, default=None, help="threads used for cells")
    parser.add_argument(
        "--log-level", default="WARNING", choices=("DEBUG", "INFO", "WARNING", "ERROR"), type=str.upper
    )


def build_parser() -> argparse.ArgumentParser:
    """Parser with the estimate, table and sweep sub-commands."""
    parser = argparse.ArgumentParser(prog="glcde", description="Conditional density estimation at a point with GL smoothing selection")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    estimate = commands.add_parser("estimate", help="estimate f(x, .) once and export the curve")
    _add_common(estimate)
    estimate.add_argument("--truth", action="store_true", help="add the true density as a third column")
    estimate.add_argument("--grid-points", type=int, default=DEFAULT_CURVE_GRID_POINTS)
    estimate.set_defaults(handler=cmd_estimate)

    table = commands.add_parser("table", help="Monte Carlo MSE for a list of cells")
    _add_common(table)
    table.add_argument("--preset", help=f"one of {', '.join(sorted(PRESETS))}")
    table.add_argument("--cells", help="CSV with columns example,estimator,x,n,eta,fx_known")
    table.set_defaults(handler=cmd_table)

    sweep = commands.add_parser("sweep", help="Monte Carlo MSE over several eta values")
    _add_common(sweep)
    sweep.add_argument("--etas", type=float, nargs="+", default=list(DEFAULT_SWEEP_ETAS))
    sweep.set_defaults(handler=cmd_sweep)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    writer = OutputWriter(Path(args.out))
    try:
        args.handler(args, writer)
    except UsageError as err:
        writer.discard()
        _LOGGER.error("%s", err)
        print(f"glcde: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (ConditionalDensityError, OSError) as err:
        writer.discard()
        _LOGGER.error("%s failed: %s", args.command, err)
        print(f"glcde: {args.command} failed: {err}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK
