"""Technical indicators over daily OHLCV bars: RSI, MFI, EMA, stochastic %K, MACD.

Every indicator returns an :class:`IndicatorSeries` aligned with its input:
``values[t]`` is NaN for ``t < warmup`` and defined afterwards.

Zero-denominator conventions (continuous limits of the ratio formulas):
RSI/MFI with no down-moves give 100, with no moves at all give 50; a flat
stochastic window (highest high == lowest low) gives 50.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date
from typing import Sequence

import numpy as np

from . import _backend
from .errors import DegenerateWindowError, InsufficientDataError, ValidationError


@dataclass(frozen=True)
class PriceBar:
    date: date
    open: float
    high: float
    low: float
    close: float
    volume: float

    def problems(self) -> list[str]:
        """Return the list of violated bar invariants (empty when valid)."""
        out = []
        prices = (self.open, self.high, self.low, self.close)
        if not all(np.isfinite(prices)) or not np.isfinite(self.volume):
            return ["non-finite value"]
        if min(prices) <= 0:
            out.append("prices must be positive")
        if self.high < self.low:
            out.append(f"high {self.high} < low {self.low}")
        if self.low > min(self.open, self.close):
            out.append(f"low {self.low} above min(open, close)")
        if self.high < max(self.open, self.close):
            out.append(f"high {self.high} below max(open, close)")
        if self.volume < 0:
            out.append(f"negative volume {self.volume}")
        return out


@dataclass(frozen=True)
class IndicatorSeries:
    name: str
    values: np.ndarray
    warmup: int

    def defined(self) -> np.ndarray:
        return self.values[self.warmup:]

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class IndicatorParams:
    rsi_period: int = 14
    mfi_period: int = 14
    ema_alpha: float = 2.0 / 11.0
    stoch_period: int = 14
    macd_alpha_short: float = 0.15
    macd_alpha_long: float = 0.075
    macd_signal_alpha: float = 0.2

    def __post_init__(self):
        problems = self.problems()
        if problems:
            raise ValidationError("; ".join(problems))

    def problems(self) -> list[str]:
        out = []
        for name in ("rsi_period", "mfi_period", "stoch_period"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                out.append(f"{name} must be an integer >= 1, got {value}")
        if not 0 < self.ema_alpha <= 1:
            out.append(f"ema_alpha must be in (0, 1], got {self.ema_alpha}")
        for name in ("macd_alpha_short", "macd_alpha_long", "macd_signal_alpha"):
            value = getattr(self, name)
            if not 0 < value < 1:
                out.append(f"{name} must be in (0, 1), got {value}")
        if not self.macd_alpha_short > self.macd_alpha_long:
            out.append("macd_alpha_short must exceed macd_alpha_long")
        return out

    @property
    def warmup(self) -> int:
        """Leading rows without every indicator defined."""
        return max(self.rsi_period, self.mfi_period, self.stoch_period - 1)


def _as_vector(values, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValidationError(f"{what} must be one-dimensional")
    return arr


def _check_period(period: int) -> int:
    if int(period) != period or period < 1:
        raise ValidationError(f"period must be an integer >= 1, got {period}")
    return int(period)


def _columns(bars: Sequence[PriceBar]):
    high = np.array([b.high for b in bars], dtype=np.float64)
    low = np.array([b.low for b in bars], dtype=np.float64)
    close = np.array([b.close for b in bars], dtype=np.float64)
    volume = np.array([b.volume for b in bars], dtype=np.float64)
    return high, low, close, volume


def rsi(closes, period: int = 14) -> IndicatorSeries:
    """Relative strength index from simple averages of the last ``period`` deltas."""
    period = _check_period(period)
    closes = _as_vector(closes, "closes")
    if len(closes) <= period:
        raise InsufficientDataError("rsi", period + 1, len(closes))
    return IndicatorSeries("rsi", _backend.impl.rsi(closes, period), period)


def mfi(bars: Sequence[PriceBar], period: int = 14) -> IndicatorSeries:
    """Money flow index. Raises DegenerateWindowError on a window with zero total volume."""
    period = _check_period(period)
    if len(bars) <= period:
        raise InsufficientDataError("mfi", period + 1, len(bars))
    high, low, close, volume = _columns(bars)
    typical = (high + low + close) / 3.0
    values, dead = _backend.impl.mfi(typical, volume, period)
    if dead >= 0:
        raise DegenerateWindowError(
            f"mfi: window ending at index {dead} has zero total volume"
        )
    return IndicatorSeries("mfi", values, period)


def ema(values, alpha: float) -> IndicatorSeries:
    """Exponential moving average seeded with the first value."""
    values = _as_vector(values, "values")
    if len(values) == 0:
        raise InsufficientDataError("ema", 1, 0)
    if not 0 < alpha <= 1:
        raise ValidationError(f"alpha must be in (0, 1], got {alpha}")
    return IndicatorSeries("ema", _backend.impl.ema(values, float(alpha)), 0)


def stochastic_k(bars: Sequence[PriceBar], period: int = 14) -> IndicatorSeries:
    period = _check_period(period)
    if len(bars) < period:
        raise InsufficientDataError("stochastic_k", period, len(bars))
    high, low, close, _ = _columns(bars)
    return IndicatorSeries(
        "stoch_k", _backend.impl.stoch_k(high, low, close, period), period - 1
    )


def macd(closes, params: IndicatorParams | None = None) -> tuple[IndicatorSeries, IndicatorSeries]:
    """MACD line (short EMA minus long EMA) and its signal line.

    Uses the conventional sign: a rising series gives a positive MACD.
    """
    params = params or IndicatorParams()
    closes = _as_vector(closes, "closes")
    if len(closes) == 0:
        raise InsufficientDataError("macd", 1, 0)
    short = _backend.impl.ema(closes, params.macd_alpha_short)
    long_ = _backend.impl.ema(closes, params.macd_alpha_long)
    line = short - long_
    signal = _backend.impl.ema(line, params.macd_signal_alpha)
    return IndicatorSeries("macd", line, 0), IndicatorSeries("macd_signal", signal, 0)


@dataclass(frozen=True)
class IndicatorTable:
    """All indicator columns for one bar sequence, as used by the CLI dump."""

    close: np.ndarray
    columns: dict[str, IndicatorSeries] = field(default_factory=dict)


def compute_all(bars: Sequence[PriceBar], params: IndicatorParams | None = None) -> IndicatorTable:
    params = params or IndicatorParams()
    close = np.array([b.close for b in bars], dtype=np.float64)
    line, signal = macd(close, params)
    cols = {
        "rsi": rsi(close, params.rsi_period),
        "mfi": mfi(bars, params.mfi_period),
        "ema": ema(close, params.ema_alpha),
        "stoch_k": stochastic_k(bars, params.stoch_period),
        "macd": line,
        "macd_signal": signal,
    }
    return IndicatorTable(close, cols)
