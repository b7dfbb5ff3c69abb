import math
from datetime import date, timedelta

import numpy as np
import pytest

from exchopt.market_data import (MarketDataError, PricePairSeries, load_csv,
                                 log_returns, rolling_correlation, summary)


def write_csv(path, rows, header="date,price1,price2"):
    path.write_text(header + "\n" + "\n".join(rows) + "\n")
    return path


def synthetic_series(n=400, seed=12):
    rng = np.random.default_rng(seed)
    # AR(1) log prices with partly shared innovations
    z = rng.standard_normal((2, n))
    common = rng.standard_normal(n)
    r1 = 0.01 * (0.6 * common + 0.8 * z[0])
    r2 = 0.012 * (0.5 * common + 0.87 * z[1])
    p1 = 60 * np.exp(np.cumsum(r1))
    p2 = 65 * np.exp(np.cumsum(r2))
    dates = np.datetime64("2015-01-01") + np.arange(n)
    rows = [f"{d},{a:.6f},{b:.6f}" for d, a, b in zip(dates, p1, p2)]
    return rows


def test_load_small_file(tmp_path):
    p = write_csv(tmp_path / "x.csv", ["2020-01-01,10,20", "2020-01-02,11,21",
                                       "2020-01-03,12,22"])
    s = load_csv(p)
    assert len(s) == 3
    assert s.p1[2] == 12


def test_load_rejects_negative_price(tmp_path):
    p = write_csv(tmp_path / "x.csv",
                  ["2020-01-01,10,20", "2020-01-02,11,21",
                   "2020-01-03,-1,22", "2020-01-04,12,23"])
    with pytest.raises(MarketDataError, match="line 4"):
        load_csv(p)


def test_load_rejects_duplicate_dates(tmp_path):
    p = write_csv(tmp_path / "x.csv",
                  ["2020-01-01,10,20", "2020-01-01,11,21"])
    with pytest.raises(MarketDataError, match="strictly increasing"):
        load_csv(p)


def test_load_rejects_bad_header(tmp_path):
    p = write_csv(tmp_path / "x.csv", ["2020-01-01,10,20"], header="a,b,c")
    with pytest.raises(MarketDataError, match="header"):
        load_csv(p)


def test_load_reports_at_most_ten_lines(tmp_path):
    rows = [f"2020-01-{d:02d},bad,1" for d in range(1, 26)]
    p = write_csv(tmp_path / "x.csv", rows)
    with pytest.raises(MarketDataError, match=r"\+15 more"):
        load_csv(p)


def test_log_returns_constant_prices(tmp_path):
    p = write_csv(tmp_path / "x.csv",
                  [f"2020-01-{d:02d},50,75" for d in range(1, 6)])
    r1, r2 = log_returns(load_csv(p))
    assert (r1 == 0).all() and (r2 == 0).all()


def test_log_returns_known_value(tmp_path):
    p = write_csv(tmp_path / "x.csv", ["2020-01-01,100,100",
                                       "2020-01-02,110,100"])
    r1, _ = log_returns(load_csv(p))
    assert len(r1) == 1
    assert r1[0] == pytest.approx(math.log(1.1), rel=1e-15)
    assert r1[0] == pytest.approx(0.0953102, abs=1e-7)


def test_summary_symmetric_returns_zero_skew(tmp_path):
    # prices alternating up/down by the same log step
    prices = [100.0]
    for k in range(40):
        prices.append(prices[-1] * (math.e ** (0.01 if k % 2 == 0 else -0.01)))
    rows = [f"{np.datetime64('2020-01-01') + k},{p:.9f},{p:.9f}"
            for k, p in enumerate(prices)]
    s = summary(load_csv(write_csv(tmp_path.joinpath("x.csv"), rows)))
    assert s.skewness[0] == pytest.approx(0.0, abs=1e-10)


def test_summary_gaussian_kurtosis(tmp_path):
    n = 100_000
    rng = np.random.default_rng(314)
    r = rng.standard_normal(n) * 0.01
    prices = 100 * np.exp(np.concatenate([[0.0], np.cumsum(r)]))
    dates = np.datetime64("2000-01-01") + np.arange(n + 1)
    rows = [f"{d},{p:.10f},{p:.10f}" for d, p in zip(dates, prices)]
    s = summary(load_csv(write_csv(tmp_path / "g.csv", rows)))
    se = math.sqrt(24.0 / n)
    assert abs(s.kurtosis[0] - 3.0) < 3 * se


def test_summary_matches_scipy_conventions(tmp_path):
    from scipy import stats
    rows = synthetic_series(300)
    s = summary(load_csv(write_csv(tmp_path / "x.csv", rows)))
    series = load_csv(tmp_path / "x.csv")
    r1, r2 = log_returns(series)
    assert s.skewness[0] == pytest.approx(stats.skew(r1, bias=True), rel=1e-12)
    assert s.kurtosis[1] == pytest.approx(
        stats.kurtosis(r2, fisher=False, bias=True), rel=1e-12)
    assert s.price_correlation == pytest.approx(
        np.corrcoef(series.p1, series.p2)[0, 1], rel=1e-12)


def test_summary_permutation_covariant(tmp_path):
    rows = synthetic_series(250)
    a = summary(load_csv(write_csv(tmp_path / "x.csv", rows)))
    swapped = [",".join([r.split(",")[0], r.split(",")[2], r.split(",")[1]])
               for r in rows]
    b = summary(load_csv(write_csv(tmp_path / "y.csv", swapped)))
    assert a.mean == (b.mean[1], b.mean[0])
    assert a.kurtosis == (b.kurtosis[1], b.kurtosis[0])
    assert a.price_correlation == pytest.approx(b.price_correlation, rel=1e-14)


def test_rolling_affine_dependence(tmp_path):
    n = 80
    dates = np.datetime64("2020-01-01") + np.arange(n)
    x = np.linspace(10, 40, n) + np.sin(np.arange(n))
    rows = [f"{d},{a:.8f},{2 * a + 1:.8f}" for d, a in zip(dates, x)]
    series = load_csv(write_csv(tmp_path / "x.csv", rows))
    _, corr = rolling_correlation(series, window=10, on="prices")
    assert corr == pytest.approx(np.ones(n - 9), abs=1e-10)


def test_rolling_zero_variance_yields_nan(tmp_path):
    n = 30
    dates = np.datetime64("2020-01-01") + np.arange(n)
    rows = [f"{d},{10 + k},{5.0}" for k, d in enumerate(dates)]
    series = load_csv(write_csv(tmp_path / "x.csv", rows))
    _, corr = rolling_correlation(series, window=5, on="prices")
    assert np.isnan(corr).all()


def test_rolling_window_equals_overall():
    rows = synthetic_series(150)
    series = PricePairSeries(
        dates=tuple(date(2020, 1, 1) + timedelta(days=k)
                    for k in range(len(rows))),
        p1=np.array([float(r.split(",")[1]) for r in rows]),
        p2=np.array([float(r.split(",")[2]) for r in rows]))
    s = summary(series)
    dates, corr = rolling_correlation(series, window=len(series), on="prices")
    assert len(corr) == 1
    assert corr[0] == pytest.approx(s.price_correlation, rel=1e-12)


def test_rolling_matches_bruteforce(tmp_path):
    rows = synthetic_series(320, seed=5)
    series = load_csv(write_csv(tmp_path / "x.csv", rows))
    for on in ("prices", "returns"):
        if on == "prices":
            x, y = series.p1, series.p2
        else:
            x, y = log_returns(series)
        dates, corr = rolling_correlation(series, window=50, on=on)
        assert len(corr) == len(x) - 50 + 1
        for k in (0, 7, 100, len(corr) - 1):
            xa = x[k:k + 50]
            ya = y[k:k + 50]
            want = np.corrcoef(xa, ya)[0, 1]
            assert corr[k] == pytest.approx(want, rel=1e-12)


def test_rolling_validates_window():
    rows = synthetic_series(40)
    series = PricePairSeries(
        dates=tuple(date(2021, 1, 1) + timedelta(days=k) for k in range(40)),
        p1=np.arange(1.0, 41.0), p2=np.arange(2.0, 42.0))
    with pytest.raises(ValueError):
        rolling_correlation(series, window=2)
    with pytest.raises(ValueError):
        rolling_correlation(series, window=60)
