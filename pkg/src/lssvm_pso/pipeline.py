"""OHLCV ingestion, feature construction, normalization and chronological split.

Feature row t holds ``[close, RSI, MFI, EMA, %K, MACD]`` computed from bars
0..t; its target is the close of bar t+1.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from datetime import date
from pathlib import Path

import numpy as np

from . import indicators as ind
from .errors import (
    BarInvariantError,
    ConstantColumnError,
    DataFormatError,
    DuplicateDateError,
    InsufficientDataError,
    MissingColumnsError,
    ParseError,
    ValidationError,
)
from .indicators import IndicatorParams, PriceBar

FEATURES = ("close", "rsi", "mfi", "ema", "stoch_k", "macd")
TARGET = "next_close"


@dataclass(frozen=True)
class CsvSchema:
    date: str = "Date"
    open: str = "Open"
    high: str = "High"
    low: str = "Low"
    close: str = "Close"
    volume: str = "Volume"
    date_format: str | None = None  # None means ISO 8601

    def columns(self) -> dict[str, str]:
        return {f: getattr(self, f) for f in ("date", "open", "high", "low", "close", "volume")}


@dataclass(frozen=True)
class OhlcvSeries:
    symbol: str
    bars: tuple[PriceBar, ...]

    def __post_init__(self):
        object.__setattr__(self, "bars", tuple(self.bars))
        if len(self.bars) < 2:
            raise InsufficientDataError(f"series {self.symbol!r}", 2, len(self.bars))
        for prev, cur in zip(self.bars, self.bars[1:]):
            if not cur.date > prev.date:
                raise ValidationError(f"{self.symbol}: dates not strictly increasing at {cur.date}")

    def __len__(self) -> int:
        return len(self.bars)

    @property
    def closes(self) -> np.ndarray:
        return np.array([b.close for b in self.bars])

    @property
    def dates(self) -> list[date]:
        return [b.date for b in self.bars]


def _parse_date(text: str, fmt: str | None) -> date:
    from datetime import datetime

    text = text.strip()
    if fmt is None:
        return date.fromisoformat(text[:10])
    return datetime.strptime(text, fmt).date()


def load_csv(path, schema: CsvSchema | None = None, symbol: str | None = None) -> OhlcvSeries:
    """Read and validate a daily OHLCV CSV. Row numbers in errors count the header as row 1."""
    schema = schema or CsvSchema()
    path = Path(path)
    symbol = symbol or path.stem
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = [h.strip() for h in (reader.fieldnames or [])]
        reader.fieldnames = header
        wanted = schema.columns()
        missing = [col for col in wanted.values() if col not in header]
        if missing:
            raise MissingColumnsError(f"{path.name}: missing columns {missing}")
        bars: list[PriceBar] = []
        seen: dict[date, int] = {}
        for rowno, row in enumerate(reader, start=2):
            if not any((v or "").strip() for v in row.values()):
                continue
            try:
                day = _parse_date(row[wanted["date"]], schema.date_format)
            except (ValueError, TypeError):
                raise ParseError(f"unparsable date {row[wanted['date']]!r}", rowno) from None
            nums = {}
            for key in ("open", "high", "low", "close", "volume"):
                raw = row[wanted[key]]
                try:
                    nums[key] = float(raw)
                except (ValueError, TypeError):
                    raise ParseError(f"unparsable {key} value {raw!r}", rowno) from None
            if day in seen:
                raise DuplicateDateError(
                    f"duplicate date {day.isoformat()} (first seen on row {seen[day]})", rowno
                )
            seen[day] = rowno
            bar = PriceBar(day, **nums)
            problems = bar.problems()
            if problems:
                raise BarInvariantError("; ".join(problems), rowno)
            bars.append(bar)
    bars.sort(key=lambda b: b.date)
    if len(bars) < 2:
        raise DataFormatError(f"{path.name}: need at least 2 bars, found {len(bars)}")
    return OhlcvSeries(symbol, tuple(bars))


def write_csv(series: OhlcvSeries, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["Date", "Open", "High", "Low", "Close", "Volume"])
        for b in series.bars:
            writer.writerow([b.date.isoformat(), repr(b.open), repr(b.high), repr(b.low),
                             repr(b.close), repr(b.volume)])


@dataclass(frozen=True)
class NormStats:
    center: np.ndarray
    spread: np.ndarray
    target_center: float
    target_spread: float

    def to_dict(self) -> dict:
        return {
            "center": self.center.tolist(),
            "spread": self.spread.tolist(),
            "target_center": self.target_center,
            "target_spread": self.target_spread,
        }


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    X: np.ndarray
    y: np.ndarray
    dates: tuple[date, ...]
    norm: NormStats | None = None
    columns: tuple[str, ...] = FEATURES

    def __len__(self) -> int:
        return self.X.shape[0]

    def rows(self, start: int, stop: int) -> "FeatureMatrix":
        return replace(self, X=self.X[start:stop], y=self.y[start:stop], dates=self.dates[start:stop])

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["date", *self.columns, TARGET])
            for d, row, target in zip(self.dates, self.X, self.y):
                writer.writerow([d.isoformat(), *(repr(float(v)) for v in row), repr(float(target))])


def build_features(series: OhlcvSeries, params: IndicatorParams | None = None) -> FeatureMatrix:
    params = params or IndicatorParams()
    n = len(series)
    warm = params.warmup
    if n < warm + 2:
        raise InsufficientDataError(f"build_features({series.symbol})", warm + 2, n)
    table = ind.compute_all(series.bars, params)
    cols = [table.close] + [table.columns[name].values for name in FEATURES[1:]]
    full = np.column_stack(cols)
    X = full[warm:n - 1].copy()
    y = table.close[warm + 1:].copy()
    if not np.all(np.isfinite(X)):
        raise ValidationError(f"{series.symbol}: non-finite feature after warm-up")
    dates = tuple(b.date for b in series.bars[warm:n - 1])
    return FeatureMatrix(X, y, dates)


def compute_stats(fm: FeatureMatrix) -> NormStats:
    """Per-column mean and population standard deviation."""
    center = fm.X.mean(axis=0)
    spread = fm.X.std(axis=0)
    for name, s in zip(fm.columns, spread):
        if not s > 0:
            raise ConstantColumnError(name)
    t_spread = float(fm.y.std())
    if not t_spread > 0:
        raise ConstantColumnError(TARGET)
    return NormStats(center, spread, float(fm.y.mean()), t_spread)


def normalize(fm: FeatureMatrix, stats: NormStats | None = None) -> tuple[FeatureMatrix, NormStats]:
    """Z-score features and target; ``stats`` defaults to statistics of ``fm`` itself."""
    if stats is None:
        stats = compute_stats(fm)
    X = (fm.X - stats.center) / stats.spread
    y = (fm.y - stats.target_center) / stats.target_spread
    return replace(fm, X=X, y=y, norm=stats), stats


def denormalize_predictions(pred, stats: NormStats) -> np.ndarray:
    return np.asarray(pred, dtype=np.float64) * stats.target_spread + stats.target_center


def _floor(n: int, fraction: float) -> int:
    # guard against 0.7 * n landing just below an integer
    return int(math.floor(n * fraction + 1e-9))


@dataclass(frozen=True, eq=False)
class SplitDataset:
    """Chronological split. ``fit`` + ``val`` = ``train``; every fold is normalized with train stats."""

    raw: FeatureMatrix
    train: FeatureMatrix
    fit: FeatureMatrix
    val: FeatureMatrix
    test: FeatureMatrix
    stats: NormStats
    n_train: int
    n_fit: int

    @property
    def raw_train(self) -> FeatureMatrix:
        return self.raw.rows(0, self.n_train)

    @property
    def raw_test(self) -> FeatureMatrix:
        return self.raw.rows(self.n_train, len(self.raw))


def split_70_30(fm: FeatureMatrix, val_fraction: float = 0.2, train_fraction: float = 0.7) -> SplitDataset:
    n = len(fm)
    if not 0 < train_fraction < 1:
        raise ValidationError(f"train_fraction must be in (0, 1), got {train_fraction}")
    if not 0 < val_fraction < 1:
        raise ValidationError(f"val_fraction must be in (0, 1), got {val_fraction}")
    if n < 10:
        raise InsufficientDataError("split_70_30", 10, n)
    n_train = _floor(n, train_fraction)
    n_val = _floor(n_train, val_fraction)
    n_fit = n_train - n_val
    if min(n_val, n_fit, n - n_train) < 1:
        raise ValidationError(
            f"split of {n} rows leaves an empty fold (fit={n_fit}, val={n_val}, test={n - n_train})"
        )
    raw_train = fm.rows(0, n_train)
    stats = compute_stats(raw_train)
    normed, _ = normalize(fm, stats)
    return SplitDataset(
        raw=fm,
        train=normed.rows(0, n_train),
        fit=normed.rows(0, n_fit),
        val=normed.rows(n_fit, n_train),
        test=normed.rows(n_train, n),
        stats=stats,
        n_train=n_train,
        n_fit=n_fit,
    )
