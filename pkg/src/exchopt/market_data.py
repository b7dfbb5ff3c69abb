"""Paired daily price series: loading, return moments, rolling correlation.

Moment conventions: biased (population-style) central moment estimators,
skewness m3/m2^1.5 and non-excess kurtosis m4/m2^2, chosen to reproduce
printed summary tables; documented here rather than configurable.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import date, datetime

import numpy as np


class MarketDataError(ValueError):
    pass


@dataclass(frozen=True)
class PricePairSeries:
    dates: tuple[date, ...]
    p1: np.ndarray
    p2: np.ndarray

    def __len__(self):
        return len(self.dates)


@dataclass(frozen=True)
class StatsSummary:
    mean: tuple[float, float]
    std: tuple[float, float]
    skewness: tuple[float, float]
    kurtosis: tuple[float, float]
    price_correlation: float
    return_correlation: float
    n_prices: int
    n_returns: int

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "assets": [
                {"mean": self.mean[j], "std": self.std[j],
                 "skewness": self.skewness[j], "kurtosis": self.kurtosis[j]}
                for j in (0, 1)
            ],
            "price_correlation": self.price_correlation,
            "return_correlation": self.return_correlation,
            "n_prices": self.n_prices,
            "n_returns": self.n_returns,
        }


def load_csv(path) -> PricePairSeries:
    """Read `date,price1,price2` rows with ISO dates and positive prices.

    Malformed rows are collected and reported with their line numbers (the
    first ten); non-increasing dates are rejected.
    """
    bad = []
    dates = []
    p1 = []
    p2 = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["date", "price1", "price2"]:
            raise MarketDataError(f"{path}: expected header 'date,price1,price2'")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                bad.append(f"line {lineno}: expected 3 fields, got {len(row)}")
                continue
            try:
                d = datetime.strptime(row[0].strip(), "%Y-%m-%d").date()
                a = float(row[1])
                b = float(row[2])
            except ValueError:
                bad.append(f"line {lineno}: unparseable row {row!r}")
                continue
            if not (a > 0 and b > 0) or not (math.isfinite(a) and math.isfinite(b)):
                bad.append(f"line {lineno}: prices must be positive finite")
                continue
            dates.append(d)
            p1.append(a)
            p2.append(b)
    if bad:
        shown = "; ".join(bad[:10])
        more = f" (+{len(bad) - 10} more)" if len(bad) > 10 else ""
        raise MarketDataError(f"{path}: {shown}{more}")
    if len(dates) < 2:
        raise MarketDataError(f"{path}: need at least 2 rows")
    for i in range(1, len(dates)):
        if dates[i] <= dates[i - 1]:
            raise MarketDataError(
                f"{path}: dates not strictly increasing at line {i + 2}")
    return PricePairSeries(dates=tuple(dates), p1=np.array(p1), p2=np.array(p2))


def log_returns(series: PricePairSeries) -> tuple[np.ndarray, np.ndarray]:
    """r_t = ln(p_t / p_{t-1}); gaps between rows are not imputed."""
    return (np.diff(np.log(series.p1)), np.diff(np.log(series.p2)))


def _moments(x: np.ndarray) -> tuple[float, float, float, float]:
    m = x.mean()
    d = x - m
    m2 = np.mean(d ** 2)
    if m2 == 0:
        return float(m), 0.0, 0.0, 0.0
    m3 = np.mean(d ** 3)
    m4 = np.mean(d ** 4)
    return float(m), float(math.sqrt(m2)), float(m3 / m2 ** 1.5), float(m4 / m2 ** 2)


def _corr(x: np.ndarray, y: np.ndarray) -> float:
    dx = x - x.mean()
    dy = y - y.mean()
    den = math.sqrt(float(dx @ dx) * float(dy @ dy))
    if den == 0:
        return math.nan
    return float(dx @ dy) / den


def summary(series: PricePairSeries) -> StatsSummary:
    r1, r2 = log_returns(series)
    if len(r1) < 4:
        raise MarketDataError("need at least 4 returns for four-moment summary")
    s1 = _moments(r1)
    s2 = _moments(r2)
    return StatsSummary(
        mean=(s1[0], s2[0]), std=(s1[1], s2[1]),
        skewness=(s1[2], s2[2]), kurtosis=(s1[3], s2[3]),
        price_correlation=_corr(series.p1, series.p2),
        return_correlation=_corr(r1, r2),
        n_prices=len(series), n_returns=len(r1),
    )


def rolling_correlation(series: PricePairSeries, window: int = 50,
                        on: str = "prices") -> tuple[tuple[date, ...], np.ndarray]:
    """Trailing-window Pearson correlation, dated by window end.

    Output length is len(input) - window + 1, where the input is the price
    series or its returns.  Windows with zero variance in either input
    produce NaN markers.
    """
    if on not in ("prices", "returns"):
        raise ValueError("on must be 'prices' or 'returns'")
    if window < 3:
        raise ValueError("window must be at least 3")
    if on == "prices":
        x, y = series.p1, series.p2
        dates = series.dates
    else:
        x, y = log_returns(series)
        dates = series.dates[1:]
    n = len(x)
    if n < window:
        raise ValueError(f"series too short for window {window} (have {n})")
    xw = np.lib.stride_tricks.sliding_window_view(x, window)
    yw = np.lib.stride_tricks.sliding_window_view(y, window)
    dx = xw - xw.mean(axis=1, keepdims=True)
    dy = yw - yw.mean(axis=1, keepdims=True)
    num = (dx * dy).sum(axis=1)
    den = np.sqrt((dx ** 2).sum(axis=1) * (dy ** 2).sum(axis=1))
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(den > 0, num / den, np.nan)
    return tuple(dates[window - 1:]), out
