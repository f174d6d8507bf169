"""Command-line entry point: ``lssvm-pso {indicators,train,benchmark}``.

Exit status is 0 when the command produced its primary artifact. Diagnostics
are single lines on stderr, prefixed with a failure class.
"""
from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import config as config_mod
from .errors import (
    ConfigError,
    DataFormatError,
    ExperimentError,
    LssvmPsoError,
    NumericalFailure,
    ValidationError,
)
from .evaluate import EvalReport, ExperimentConfig, failed_report, render_report, run_experiment, symbol_seed
from .indicators import compute_all
from .pipeline import CsvSchema, load_csv
from .pso import write_trace

logger = logging.getLogger("lssvm_pso")

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2


def _diag(kind: str, message: str) -> None:
    print(f"error [{kind}]: {' '.join(str(message).split())}", file=sys.stderr)


def _classify(exc: BaseException) -> str:
    if isinstance(exc, FileNotFoundError):
        return "file not found"
    if isinstance(exc, OSError):
        return "io"
    if isinstance(exc, ConfigError):
        return "config"
    if isinstance(exc, ExperimentError):
        return _classify(exc.cause)
    if isinstance(exc, DataFormatError):
        return "parse"
    if isinstance(exc, NumericalFailure):
        return "numerical"
    if isinstance(exc, ValidationError):
        return "validation"
    return "error"


def _overrides(args) -> dict:
    return {
        "data": args.data,
        "symbol": args.symbol,
        "seed": args.seed,
        "out": args.out,
        "kernel": args.kernel,
        "workers": getattr(args, "workers", None),
        "val_fraction": getattr(args, "val_fraction", None),
    }


def _config_problems(exc: ConfigError) -> int:
    for problem in exc.problems:
        _diag("file not found" if "not found" in problem else "config", problem)
    return EXIT_USAGE


# indicators ---------------------------------------------------------------

INDICATOR_COLUMNS = ("rsi", "mfi", "ema", "stoch_k", "macd", "macd_signal")


def write_indicator_csv(bars, table, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["date", "close", *INDICATOR_COLUMNS])
    for t, bar in enumerate(bars):
        row = [bar.date.isoformat(), repr(bar.close)]
        for name in INDICATOR_COLUMNS:
            series = table.columns[name]
            row.append("" if t < series.warmup else repr(float(series.values[t])))
        writer.writerow(row)


def cmd_indicators(args) -> int:
    try:
        cfg = config_mod.load(args.config, _overrides(args))
    except ConfigError as exc:
        return _config_problems(exc)
    if len(cfg.paths) != 1:
        _diag("config", f"indicators needs exactly one CSV, got {len(cfg.paths)}")
        return EXIT_USAGE
    symbol, path = cfg.datasets()[0]
    try:
        series = load_csv(path, cfg.schema, symbol=symbol)
        table = compute_all(series.bars, cfg.experiment.indicators)
        if args.out is None:
            write_indicator_csv(series.bars, table, sys.stdout)
        else:
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            target = out / f"{series.symbol}_indicators.csv"
            with open(target, "w", newline="") as fh:
                write_indicator_csv(series.bars, table, fh)
            print(target)
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK
    except (LssvmPsoError, OSError) as exc:
        _diag(_classify(exc), exc)
        return EXIT_FAILURE
    return EXIT_OK


# train --------------------------------------------------------------------

def _run_symbol(symbol: str, path: Path, schema: CsvSchema, experiment: ExperimentConfig, seed: int,
                trace_dir: Path | None) -> EvalReport:
    """Load + run one symbol. Failures become failed reports, never exceptions."""
    try:
        series = load_csv(path, schema, symbol=symbol)
        report = run_experiment(series, experiment, seed=seed)
    except (LssvmPsoError, OSError) as exc:
        kind = _classify(exc)
        return failed_report(symbol, seed, experiment.kernel, f"{kind}: {' '.join(str(exc).split())}")
    if trace_dir is not None:
        write_trace(trace_dir / f"{symbol}_pso_trace.csv", report.pso, experiment.space)
    report.pso = None  # keep the report light when it crosses a process boundary
    return report


def cmd_train(args) -> int:
    try:
        cfg = config_mod.load(args.config, _overrides(args))
    except ConfigError as exc:
        return _config_problems(exc)
    if len(cfg.paths) != 1:
        _diag("config", f"train needs exactly one dataset, got {len(cfg.paths)}; use --symbol or --data")
        return EXIT_USAGE
    symbol, path = cfg.datasets()[0]
    seed = symbol_seed(cfg.seed, symbol)
    try:
        cfg.out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        _diag("io", exc)
        return EXIT_FAILURE
    report = _run_symbol(symbol, path, cfg.schema, cfg.experiment, seed, cfg.out)
    if report.failed:
        _diag("train", f"{symbol}: {report.error}")
        return EXIT_FAILURE
    report.model.meta.update({"symbol": symbol, "seed": seed})
    report.model.save(cfg.out / f"{symbol}_model.json")
    (cfg.out / f"{symbol}_report.csv").write_text(render_report([report], "csv"))
    sys.stdout.write(render_report([report], "text"))
    return EXIT_OK


# benchmark ----------------------------------------------------------------

def cmd_benchmark(args) -> int:
    try:
        cfg = config_mod.load(args.config, _overrides(args), default_data="all")
    except ConfigError as exc:
        return _config_problems(exc)
    try:
        cfg.out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        _diag("io", exc)
        return EXIT_FAILURE
    jobs = [
        (symbol, path, cfg.schema, cfg.experiment, symbol_seed(cfg.seed, symbol), cfg.out)
        for symbol, path in cfg.datasets()
    ]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            futures = [pool.submit(_run_symbol, *job) for job in jobs]
            reports = [f.result() for f in futures]
    else:
        reports = [_run_symbol(*job) for job in jobs]

    (cfg.out / "report.csv").write_text(render_report(reports, "csv"))
    (cfg.out / "plot_data.csv").write_text(render_report(reports, "plot"))
    text = render_report(reports, "text")
    (cfg.out / "report.txt").write_text(text)
    sys.stdout.write(text)
    for rep in reports:
        if rep.failed:
            _diag("benchmark", f"{rep.symbol}: {rep.error}")
    if all(rep.failed for rep in reports):
        return EXIT_FAILURE
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lssvm-pso", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=Path, help="INI run configuration")
        p.add_argument("--data", type=Path, action="append",
                       help="CSV file or directory of CSVs (repeatable); defaults to bundled data")
        p.add_argument("--symbol", help="symbol name (selects <symbol>.csv among the data files)")
        p.add_argument("--seed", type=int, help="base seed (unsigned 64-bit)")
        p.add_argument("--out", type=Path, help="output directory")
        p.add_argument("--kernel", choices=["linear", "poly", "polynomial", "rbf", "mlp"])

    p = sub.add_parser("indicators", help="write per-date indicator columns for one CSV")
    common(p)
    p.set_defaults(func=cmd_indicators)

    p = sub.add_parser("train", help="run PSO-LS-SVM on one symbol")
    common(p)
    p.add_argument("--val-fraction", type=float, dest="val_fraction")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("benchmark", help="run every symbol and write the comparison report")
    common(p)
    p.add_argument("--val-fraction", type=float, dest="val_fraction")
    p.add_argument("--workers", type=int, help="parallel worker processes across symbols")
    p.set_defaults(func=cmd_benchmark)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
