"""Experiment runner and per-symbol comparison reports.

Three methods are scored per symbol, all in squared price units on the test
fold: ``pso_lssvm`` (PSO-tuned), ``fixed_lssvm`` (hyperparameters at the
centre of the search box) and ``naive`` (tomorrow's close = today's close).
"""
from __future__ import annotations

import csv
import io
import logging
import time
import zlib
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionMismatchError, ExperimentError, LssvmPsoError, ValidationError
from .indicators import IndicatorParams
from .kernels import canonical_family
from .lssvm import LssvmModel, fit
from .pipeline import FeatureMatrix, OhlcvSeries, SplitDataset, build_features, denormalize_predictions, split_70_30
from .pso import PsoConfig, PsoResult, SearchSpace, default_space, hyperparams_from, make_lssvm_fitness, optimize

logger = logging.getLogger(__name__)

METHODS = ("pso_lssvm", "fixed_lssvm", "naive")


def mse(predictions, targets) -> float:
    p = np.asarray(predictions, dtype=np.float64).ravel()
    t = np.asarray(targets, dtype=np.float64).ravel()
    if p.shape != t.shape:
        raise DimensionMismatchError(f"{p.size} predictions vs {t.size} targets")
    if p.size == 0:
        raise ValidationError("mse of empty vectors")
    return float(np.mean((p - t) ** 2))


def naive_baseline(test: FeatureMatrix) -> np.ndarray:
    """Persistence forecast in price units: the current close of each row."""
    if len(test) == 0:
        raise ValidationError("naive baseline needs a non-empty fold")
    close = test.X[:, 0]
    if test.norm is not None:
        close = close * test.norm.spread[0] + test.norm.center[0]
    return close.copy()


def symbol_seed(base_seed: int, symbol: str) -> int:
    """Per-symbol seed: base seed plus a stable CRC32 of the symbol, modulo 2**64."""
    return (int(base_seed) + zlib.crc32(symbol.encode("utf-8"))) % 2**64


@dataclass(frozen=True)
class ExperimentConfig:
    indicators: IndicatorParams = field(default_factory=IndicatorParams)
    kernel: str = "mlp"
    degree: int = 2
    space: SearchSpace | None = None
    pso: PsoConfig = field(default_factory=PsoConfig)
    train_fraction: float = 0.7
    val_fraction: float = 0.2
    fixed_params: dict | None = None  # overrides the box-centre defaults

    def __post_init__(self):
        object.__setattr__(self, "kernel", canonical_family(self.kernel))
        if self.space is None:
            object.__setattr__(self, "space", default_space(self.kernel))

    def fixed_hyperparams(self) -> dict[str, float]:
        params = self.space.decode(self.space.center())
        if self.fixed_params:
            params.update(self.fixed_params)
        return params


@dataclass(eq=False)
class EvalReport:
    symbol: str
    seed: int
    kernel: str
    mse: dict[str, float] = field(default_factory=dict)
    best_params: dict[str, float] = field(default_factory=dict)
    fixed_params: dict[str, float] = field(default_factory=dict)
    history: list[float] = field(default_factory=list)
    timing: dict[str, float] = field(default_factory=dict)
    error: str | None = None
    model: LssvmModel | None = field(default=None, repr=False)
    pso: PsoResult | None = field(default=None, repr=False)

    @property
    def failed(self) -> bool:
        return self.error is not None


def run_experiment(series: OhlcvSeries, config: ExperimentConfig | None = None, seed: int | None = None,
                   executor=None) -> EvalReport:
    """Features -> split -> PSO on (fit, val) -> refit on train -> score on test.

    ``seed`` overrides ``config.pso.seed`` when given.
    """
    config = config or ExperimentConfig()
    pso_cfg = config.pso if seed is None else PsoConfig(**{**config.pso.__dict__, "seed": seed})
    timing = {}
    t0 = time.perf_counter()
    try:
        fm = build_features(series, config.indicators)
        data = split_70_30(fm, config.val_fraction, config.train_fraction)
        timing["features"] = time.perf_counter() - t0

        t0 = time.perf_counter()
        fitness = make_lssvm_fitness(data.fit, data.val, config.space, config.kernel, config.degree)
        result = optimize(config.space, pso_cfg, fitness, executor=executor)
        timing["pso"] = time.perf_counter() - t0

        t0 = time.perf_counter()
        best = result.best_params(config.space)
        model = fit(data.train.X, data.train.y, hyperparams_from(config.kernel, best, config.degree))
        pso_mse = _score(model, data)
        fixed = config.fixed_hyperparams()
        fixed_model = fit(data.train.X, data.train.y, hyperparams_from(config.kernel, fixed, config.degree))
        fixed_mse = _score(fixed_model, data)
        naive_mse = mse(naive_baseline(data.test), data.raw_test.y)
        timing["score"] = time.perf_counter() - t0
    except LssvmPsoError as exc:
        raise ExperimentError(series.symbol, exc) from exc

    return EvalReport(
        symbol=series.symbol,
        seed=pso_cfg.seed,
        kernel=config.kernel,
        mse={"pso_lssvm": pso_mse, "fixed_lssvm": fixed_mse, "naive": naive_mse},
        best_params=best,
        fixed_params=fixed,
        history=list(result.history),
        timing=timing,
        model=model,
        pso=result,
    )


def _score(model: LssvmModel, data: SplitDataset) -> float:
    pred = denormalize_predictions(model.predict(data.test.X), data.stats)
    return mse(pred, data.raw_test.y)


def failed_report(symbol: str, seed: int, kernel: str, error: str) -> EvalReport:
    return EvalReport(symbol=symbol, seed=seed, kernel=kernel, error=error)


# Rendering ------------------------------------------------------------------

CSV_HEADER = ("symbol", "method", "mse", "best_C", "best_kernel_params", "seed")


def _fmt_params(params: dict[str, float]) -> str:
    return ";".join(f"{k}={v!r}" for k, v in params.items() if k != "C")


def render_csv(reports: Sequence[EvalReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for rep in reports:
        if rep.failed:
            writer.writerow([rep.symbol, "failed", "", "", rep.error, rep.seed])
            continue
        for method in METHODS:
            if method == "pso_lssvm":
                params = rep.best_params
            elif method == "fixed_lssvm":
                params = rep.fixed_params
            else:
                params = {}
            writer.writerow([
                rep.symbol,
                method,
                repr(rep.mse[method]),
                repr(params["C"]) if "C" in params else "",
                _fmt_params(params),
                rep.seed,
            ])
    return buf.getvalue()


def render_text(reports: Sequence[EvalReport]) -> str:
    width = max([len("Symbol")] + [len(r.symbol) for r in reports])
    head = f"{'Symbol':<{width}}  " + "  ".join(f"{m:>12}" for m in METHODS)
    lines = [head, "-" * len(head)]
    for rep in reports:
        if rep.failed:
            lines.append(f"{rep.symbol:<{width}}  FAILED: {rep.error}")
            continue
        lines.append(f"{rep.symbol:<{width}}  " + "  ".join(f"{rep.mse[m]:>12.4f}" for m in METHODS))
    return "\n".join(lines) + "\n"


def render_plot_data(reports: Sequence[EvalReport]) -> str:
    """Long-format (symbol, method, mse) triples for bar charts."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["symbol", "method", "mse"])
    for rep in reports:
        if rep.failed:
            continue
        for method in METHODS:
            writer.writerow([rep.symbol, method, repr(rep.mse[method])])
    return buf.getvalue()


def render_report(reports: Sequence[EvalReport], fmt: str = "text") -> str:
    if not reports:
        raise ValidationError("render_report needs at least one report")
    renderers = {"text": render_text, "csv": render_csv, "plot": render_plot_data}
    try:
        return renderers[fmt](reports)
    except KeyError:
        raise ValidationError(f"unknown report format {fmt!r}; expected one of {sorted(renderers)}") from None


def parse_report_csv(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))
