"""Deterministic synthetic OHLCV series (trend + seasonal cycle + AR(1) noise).

The bundled CSVs under ``data/`` were written by :func:`write_bundled`; the
generator is kept so tests can rebuild them and check nothing drifted.
"""
from __future__ import annotations

from dataclasses import dataclass
from datetime import date
from pathlib import Path

import numpy as np

from .indicators import PriceBar
from .pipeline import OhlcvSeries, write_csv

DATA_DIR = Path(__file__).with_name("data")
BENCHMARK_SYMBOL = "SYN01"
N_BUNDLED = 13


@dataclass(frozen=True)
class SeriesShape:
    base: float = 40.0
    slope: float = 0.02
    amplitude: float = 3.0
    period: float = 60.0
    noise: float = 0.4
    ar: float = 0.6
    volume: float = 2e6


def business_days(start: date, n: int) -> list[date]:
    days = np.busday_offset(np.datetime64(start, "D"), np.arange(n), roll="forward")
    return [d.astype(object) for d in days]


def generate(symbol: str, seed: int, n: int = 1000, shape: SeriesShape | None = None,
             start: date = date(2009, 1, 2)) -> OhlcvSeries:
    """Prices rounded to cents; high/low wrap open and close by a half-normal margin."""
    shape = shape or SeriesShape()
    rng = np.random.default_rng(seed)
    t = np.arange(n, dtype=np.float64)
    phase = rng.uniform(0, 2 * np.pi)
    noise = np.empty(n)
    noise[0] = rng.normal(0, shape.noise)
    for i in range(1, n):
        noise[i] = shape.ar * noise[i - 1] + rng.normal(0, shape.noise)
    close = shape.base + shape.slope * t + shape.amplitude * np.sin(2 * np.pi * t / shape.period + phase) + noise
    close = np.round(np.maximum(close, 1.0), 2)
    open_ = np.round(np.r_[close[0], close[:-1]] + rng.normal(0, shape.noise / 4, n), 2)
    open_ = np.maximum(open_, 0.5)
    wick = np.abs(rng.normal(0, shape.noise / 2, (2, n)))
    high = np.round(np.maximum(open_, close) + wick[0], 2)
    low = np.round(np.maximum(np.minimum(open_, close) - wick[1], 0.25), 2)
    low = np.minimum(low, np.minimum(open_, close))
    volume = np.round(shape.volume * rng.lognormal(0, 0.3, n))
    bars = tuple(
        PriceBar(d, float(o), float(h), float(lo), float(c), float(v))
        for d, o, h, lo, c, v in zip(business_days(start, n), open_, high, low, close, volume)
    )
    return OhlcvSeries(symbol, bars)


def bundled_specs() -> list[tuple[str, int, SeriesShape]]:
    """(symbol, seed, shape) for every bundled fixture."""
    specs = []
    for i in range(N_BUNDLED):
        shape = SeriesShape(
            base=20.0 + 7.0 * i,
            slope=0.01 + 0.004 * (i % 5),
            amplitude=1.0 + 0.5 * (i % 4),
            period=30.0 + 10.0 * (i % 6),
            noise=0.2 + 0.05 * (i % 7),
        )
        specs.append((f"SYN{i + 1:02d}", 1000 + i, shape))
    return specs


def write_bundled(directory: Path = DATA_DIR) -> list[Path]:
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for symbol, seed, shape in bundled_specs():
        path = directory / f"{symbol}.csv"
        write_csv(generate(symbol, seed, shape=shape), path)
        paths.append(path)
    return paths


def bundled_path(symbol: str = BENCHMARK_SYMBOL) -> Path:
    return DATA_DIR / f"{symbol}.csv"
