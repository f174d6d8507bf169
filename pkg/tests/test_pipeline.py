from dataclasses import replace
from datetime import date, timedelta

import numpy as np
import pytest

from conftest import bars_from_closes, random_series
from lssvm_pso import indicators as ind
from lssvm_pso.errors import (
    BarInvariantError,
    ConstantColumnError,
    DuplicateDateError,
    InsufficientDataError,
    MissingColumnsError,
    ParseError,
    ValidationError,
)
from lssvm_pso.indicators import IndicatorParams
from lssvm_pso.pipeline import (
    CsvSchema,
    FeatureMatrix,
    OhlcvSeries,
    build_features,
    compute_stats,
    denormalize_predictions,
    load_csv,
    normalize,
    split_70_30,
    write_csv,
)

FIVE_ROWS = """Date,Open,High,Low,Close,Volume
2012-03-01,10.0,10.5,9.8,10.2,1200
2012-03-02,10.2,10.9,10.1,10.8,1500
2012-03-05,10.8,11.0,10.4,10.5,900
2012-03-06,10.5,10.6,10.0,10.1,1100
2012-03-07,10.1,10.4,9.9,10.3,1000
"""


def _write(tmp_path, text, name="FIX.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestLoadCsv:
    def test_five_rows(self, tmp_path):
        s = load_csv(_write(tmp_path, FIVE_ROWS))
        assert s.symbol == "FIX" and len(s) == 5
        assert s.dates == sorted(s.dates)
        assert s.bars[1].close == 10.8 and s.bars[1].volume == 1500.0

    def test_descending_equals_ascending(self, tmp_path):
        head, *rows = FIVE_ROWS.strip().splitlines()
        desc = _write(tmp_path, "\n".join([head, *reversed(rows)]) + "\n", "DESC.csv")
        asc = load_csv(_write(tmp_path, FIVE_ROWS))
        assert load_csv(desc, symbol="FIX") == asc

    def test_duplicate_date_named(self, tmp_path):
        text = FIVE_ROWS + "2012-03-02,10.2,10.9,10.1,10.8,1500\n"
        with pytest.raises(DuplicateDateError, match="2012-03-02") as err:
            load_csv(_write(tmp_path, text))
        assert err.value.row == 7

    def test_missing_column(self, tmp_path):
        text = FIVE_ROWS.replace(",Volume", "").replace(",1200\n", "\n")
        with pytest.raises(MissingColumnsError, match="Volume"):
            load_csv(_write(tmp_path, text))

    @pytest.mark.parametrize("bad, row, exc", [
        (("10.8,1500", "ten,1500"), 3, ParseError),
        (("2012-03-05", "2012-13-05"), 4, ParseError),
        (("10.4,10.5,900", "11.4,10.5,900"), 4, BarInvariantError),  # low above high
        (("1100", "-5"), 5, BarInvariantError),
    ])
    def test_bad_rows_report_row_number(self, tmp_path, bad, row, exc):
        with pytest.raises(exc) as err:
            load_csv(_write(tmp_path, FIVE_ROWS.replace(*bad, 1)))
        assert err.value.row == row

    def test_custom_schema(self, tmp_path):
        text = FIVE_ROWS.replace("Close", "Adj Close").replace("Date", "Day")
        text = text.replace("2012-03-0", "0").replace(",", ",", 1)
        lines = text.splitlines()
        lines = [lines[0]] + [f"{r[:2]}/03/2012{r[2:]}" for r in lines[1:]]
        schema = CsvSchema(date="Day", close="Adj Close", date_format="%d/%m/%Y")
        s = load_csv(_write(tmp_path, "\n".join(lines)), schema)
        assert s.dates[0] == date(2012, 3, 1) and s.bars[-1].close == 10.3

    def test_round_trip(self, tmp_path, rng):
        s = random_series(rng, 30, "RT")
        write_csv(s, tmp_path / "RT.csv")
        assert load_csv(tmp_path / "RT.csv") == s

    def test_unsorted_series_rejected(self):
        bars = bars_from_closes([1.0, 2.0, 3.0])
        with pytest.raises(ValidationError):
            OhlcvSeries("X", [bars[1], bars[0], bars[2]])


@pytest.fixture
def rng():
    return np.random.default_rng(7)


class TestBuildFeatures:
    def test_constant_series_conventions(self):
        s = OhlcvSeries("C", bars_from_closes([42.0] * 40))
        fm = build_features(s)
        rsi, mfi, ema, k, macd = fm.X[:, 1:].T
        assert np.all(rsi == 50) and np.all(mfi == 50) and np.all(k == 50)
        assert np.all(macd == 0) and np.all(ema == 42.0)
        assert np.all(fm.y == 42.0) and np.all(fm.X[:, 0] == 42.0)

    def test_columns_match_indicator_slices(self, rng):
        s = random_series(rng, 60)
        params = IndicatorParams()
        fm = build_features(s, params)
        warm = params.warmup
        closes = s.closes
        expected = [
            closes,
            ind.rsi(closes, params.rsi_period).values,
            ind.mfi(s.bars, params.mfi_period).values,
            ind.ema(closes, params.ema_alpha).values,
            ind.stochastic_k(s.bars, params.stoch_period).values,
            ind.macd(closes, params)[0].values,
        ]
        assert fm.X.shape == (60 - warm - 1, 6)
        for j, col in enumerate(expected):
            np.testing.assert_array_equal(fm.X[:, j], col[warm:59])
        np.testing.assert_array_equal(fm.y, closes[warm + 1:])
        assert fm.dates[0] == s.bars[warm].date

    def test_target_is_next_close(self, rng):
        s = random_series(rng, 80)
        fm = build_features(s)
        np.testing.assert_array_equal(fm.y[:-1], fm.X[1:, 0])

    def test_minimum_length(self, rng):
        warm = IndicatorParams().warmup
        assert len(build_features(random_series(rng, warm + 2))) == 1
        with pytest.raises(InsufficientDataError, match=str(warm + 2)):
            build_features(random_series(rng, warm + 1))


def _fm(X, y=None):
    X = np.asarray(X, float)
    y = np.arange(len(X), dtype=float) if y is None else np.asarray(y, float)
    cols = tuple(f"c{j}" for j in range(X.shape[1]))
    return FeatureMatrix(X, y, tuple(range(len(X))), columns=cols)


class TestNormalize:
    def test_fixed_point(self):
        col = np.array([-1.0, 1.0, -1.0, 1.0])
        out, _ = normalize(_fm(col[:, None], col))
        np.testing.assert_allclose(out.X[:, 0], col, atol=1e-12)

    def test_round_trip(self, rng):
        fm = _fm(rng.normal(3, 2, (50, 4)), rng.normal(100, 5, 50))
        out, stats = normalize(fm)
        np.testing.assert_allclose(out.X.mean(axis=0), 0, atol=1e-12)
        np.testing.assert_allclose(out.X.std(axis=0), 1, atol=1e-12)
        np.testing.assert_allclose(denormalize_predictions(out.y, stats), fm.y, rtol=1e-13)

    def test_constant_column_named(self):
        with pytest.raises(ConstantColumnError, match="c1"):
            compute_stats(_fm([[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]]))

    def test_test_fold_uses_train_stats(self, rng):
        raw = _fm(np.cumsum(rng.normal(0.3, 1, (100, 3)), axis=0), np.cumsum(rng.normal(size=100)))
        split = split_70_30(raw)
        train = raw.X[:70]
        n = len(train)
        mean = [sum(train[:, j]) / n for j in range(3)]
        sd = [(sum((v - mean[j]) ** 2 for v in train[:, j]) / n) ** 0.5 for j in range(3)]
        expect = [[(raw.X[i, j] - mean[j]) / sd[j] for j in range(3)] for i in range(70, 100)]
        np.testing.assert_allclose(split.test.X, expect, rtol=1e-12, atol=1e-12)
        assert abs(split.test.X.mean(axis=0)).max() > 0.5  # trending data: not re-centred


class TestSplit:
    def test_ten_rows(self):
        s = split_70_30(_fm(np.arange(20.0).reshape(10, 2) ** 1.5), val_fraction=0.2)
        assert (len(s.train), len(s.test)) == (7, 3)
        assert (len(s.fit), len(s.val)) == (6, 1)

    def test_hundred_rows(self, rng):
        s = split_70_30(_fm(rng.normal(size=(100, 2))), 0.2)
        assert (len(s.fit), len(s.val), len(s.test)) == (56, 14, 30)

    @pytest.mark.parametrize("n", [10, 11, 37, 100, 333, 1000])
    def test_partition_in_order(self, rng, n):
        fm = _fm(rng.normal(size=(n, 2)))
        s = split_70_30(fm)
        dates = s.fit.dates + s.val.dates + s.test.dates
        assert dates == fm.dates
        assert max(s.train.dates) < min(s.test.dates)
        np.testing.assert_array_equal(np.concatenate([s.fit.y, s.val.y]), s.train.y)

    @pytest.mark.parametrize("kwargs", [{"val_fraction": 0}, {"val_fraction": 1.5}, {"train_fraction": 1}])
    def test_bad_fractions(self, rng, kwargs):
        with pytest.raises(ValidationError):
            split_70_30(_fm(rng.normal(size=(50, 2))), **kwargs)

    def test_too_few_rows(self, rng):
        with pytest.raises(InsufficientDataError):
            split_70_30(_fm(rng.normal(size=(9, 2))))


def _perturb_after(series: OhlcvSeries, first: int, rng) -> OhlcvSeries:
    bars = list(series.bars)
    for i in range(first, len(bars)):
        b = bars[i]
        f = float(rng.uniform(0.5, 2.0))
        bars[i] = replace(b, open=b.open * f, high=b.high * f * 1.1, low=b.low * f * 0.9,
                          close=b.close * f, volume=b.volume * float(rng.uniform(0.1, 10)))
    return OhlcvSeries(series.symbol, bars)


def test_test_fold_bars_do_not_leak(rng):
    s = random_series(rng, 200)
    warm = IndicatorParams().warmup
    before = split_70_30(build_features(s))
    # bar warm + n_train is the last training target; everything later is test-only
    after = split_70_30(build_features(_perturb_after(s, warm + before.n_train + 1, rng)))
    for name in ("center", "spread"):
        assert getattr(before.stats, name).tobytes() == getattr(after.stats, name).tobytes()
    assert before.stats.target_center == after.stats.target_center
    assert not np.array_equal(before.raw_test.X, after.raw_test.X)
