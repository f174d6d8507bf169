from datetime import date, timedelta

import numpy as np
import pytest

from lssvm_pso import _backend
from lssvm_pso.indicators import PriceBar
from lssvm_pso.pipeline import OhlcvSeries


@pytest.fixture(params=sorted(_backend.BACKENDS))
def backend(request, monkeypatch):
    """Run the test once per available backend."""
    monkeypatch.setattr(_backend, "impl", _backend.BACKENDS[request.param])
    return request.param


def random_bars(rng, n, start=date(2010, 1, 4), zero_volume=False):
    close = 50 * np.exp(np.cumsum(rng.normal(0, 0.02, n)))
    open_ = close * np.exp(rng.normal(0, 0.01, n))
    high = np.maximum(open_, close) * (1 + np.abs(rng.normal(0, 0.01, n)))
    low = np.minimum(open_, close) * (1 - np.abs(rng.normal(0, 0.01, n)))
    volume = rng.integers(1, 10_000, n).astype(float)
    if zero_volume:
        volume[:] = 0
    return [
        PriceBar(start + timedelta(days=i), float(o), float(h), float(l), float(c), float(v))
        for i, (o, h, l, c, v) in enumerate(zip(open_, high, low, close, volume))
    ]


def random_series(rng, n, symbol="RND"):
    return OhlcvSeries(symbol, random_bars(rng, n))


def bars_from_closes(closes, volume=1000.0, spread=0.5):
    return [
        PriceBar(date(2011, 1, 3) + timedelta(days=i), c, c + spread, c - spread, c, volume)
        for i, c in enumerate(closes)
    ]


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
