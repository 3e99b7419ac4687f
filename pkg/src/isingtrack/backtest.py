"""Walk-forward backtest, performance metrics, and Diebold-Mariano tests.

The simulation holds positions between quarterly rebalances (buy-and-hold
weight drift), charges a one-way turnover-proportional cost on each
rebalance day, and evaluates everything on net daily returns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.stats import norm

from .errors import ConfigError, InsufficientDataError
from .marketdata import SplitDataset
from .selector import Selection

DRIFT_MODES = ("hold", "daily_rebalance")


@dataclass(frozen=True)
class BacktestConfig:
    rebalance_frequency: str = "quarterly"
    cost_bps: float = 10.0
    risk_free_rate: float = 0.02
    trading_days_per_year: int = 252
    drift: str = "hold"

    def __post_init__(self):
        if self.rebalance_frequency != "quarterly":
            raise ConfigError(
                f"unsupported rebalance frequency {self.rebalance_frequency!r}"
            )
        if self.cost_bps < 0:
            raise ConfigError("cost_bps must be >= 0")
        if not self.trading_days_per_year > 0:
            raise ConfigError("trading_days_per_year must be positive")
        if self.drift not in DRIFT_MODES:
            raise ConfigError(f"drift must be one of {DRIFT_MODES}")


@dataclass(frozen=True)
class EquityCurve:
    """Net daily portfolio returns on the test calendar plus holdings log."""

    dates: pd.DatetimeIndex
    portfolio_returns: np.ndarray
    index_returns: np.ndarray
    holdings_log: tuple  # ((rebalance_date, Selection), ...)

    def __post_init__(self):
        if not (len(self.dates) == self.portfolio_returns.size == self.index_returns.size):
            raise ValueError("dates and return series must share one length")


@dataclass(frozen=True)
class MetricsReport:
    """Performance metrics; None marks a metric whose denominator vanished."""

    tracking_error: float | None
    correlation: float | None
    total_return: float
    sharpe: float | None
    sortino: float | None
    max_drawdown: float
    information_ratio: float | None

    def __post_init__(self):
        if self.tracking_error is not None and self.tracking_error < 0:
            raise ValueError("tracking error cannot be negative")
        if self.correlation is not None and abs(self.correlation) > 1.0:
            raise ValueError("correlation must lie in [-1, 1]")
        if not -1.0 <= self.max_drawdown <= 0.0:
            raise ValueError("max drawdown must lie in [-1, 0]")


@dataclass(frozen=True)
class DMTestResult:
    """Diebold-Mariano comparison of two methods' squared tracking losses.

    statistic and p_value are None when the loss differential is
    identically zero (the degenerate self-comparison case).
    """

    statistic: float | None
    p_value: float | None
    loss_differential_mean: float

    def __post_init__(self):
        if self.p_value is not None and not 0.0 <= self.p_value <= 1.0:
            raise ValueError("p-value must lie in [0, 1]")


def rebalance_dates(test_dates, frequency: str = "quarterly") -> list[pd.Timestamp]:
    """First trading day of each calendar quarter inside the test window.

    The first test date always qualifies (it is the first trading day of its
    own quarter within the window).
    """
    if frequency != "quarterly":
        raise ConfigError(f"unsupported rebalance frequency {frequency!r}")
    dates = pd.DatetimeIndex(test_dates)
    if len(dates) == 0:
        return []
    seen = set()
    out = []
    for d in dates:
        key = (d.year, d.quarter)
        if key not in seen:
            seen.add(key)
            out.append(d)
    return out


def run_backtest(
    selector_pipeline,
    data: SplitDataset,
    config: BacktestConfig,
    history=None,
) -> EquityCurve:
    """Simulate the test window, re-selecting at each rebalance date.

    ``selector_pipeline(asof)`` must return a Selection computed only from
    data strictly before ``asof``.  When ``history`` (a MarketHistory) is
    passed, its access window is clamped to each rebalance date so that any
    request for later data raises immediately.

    The first rebalance trades from cash, so its turnover is the full
    notional (1.0).  Costs are cost_bps * 1e-4 * turnover, subtracted from
    the rebalance day's return.
    """
    test = data.test
    dates = test.dates
    rebals = set(rebalance_dates(dates, config.rebalance_frequency))
    tickers = test.tickers
    col = {t: i for i, t in enumerate(tickers)}
    returns = test.values
    index_returns = test.index_values

    weights = np.zeros(len(tickers))
    target = np.zeros(len(tickers))
    holdings = []
    out = np.empty(len(dates))

    for row, date in enumerate(dates):
        cost = 0.0
        if date in rebals:
            if history is not None:
                history.allowed_max = date
            sel = selector_pipeline(date)
            if not isinstance(sel, Selection):
                raise TypeError("selector pipeline must return a Selection")
            unknown = [t for t in sel.tickers if t not in col]
            if unknown:
                raise ValueError(f"selection contains unknown tickers: {unknown}")
            target = np.zeros(len(tickers))
            for t, w in zip(sel.tickers, sel.weights):
                target[col[t]] = w
            turnover = float(np.abs(target - weights).sum())
            cost = config.cost_bps * 1e-4 * turnover
            weights = target.copy()
            holdings.append((date, sel))

        r_vec = returns[row]
        r_gross = float(weights @ r_vec)
        out[row] = r_gross - cost

        if config.drift == "hold":
            # buy-and-hold: positions grow with their own returns
            weights = weights * (1.0 + r_vec) / (1.0 + r_gross)
        else:
            weights = target.copy()

    return EquityCurve(
        dates=dates,
        portfolio_returns=out,
        index_returns=index_returns.copy(),
        holdings_log=tuple(holdings),
    )


def _as_series(x, name: str) -> np.ndarray:
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 1:
        raise ValueError(f"{name} must be 1-d")
    return a


def _check_pair(r_p, r_idx) -> tuple[np.ndarray, np.ndarray]:
    a = _as_series(r_p, "portfolio returns")
    b = _as_series(r_idx, "index returns")
    if a.size != b.size:
        raise ValueError(f"series lengths differ: {a.size} vs {b.size}")
    if a.size < 2:
        raise InsufficientDataError("need at least 2 observations")
    return a, b


def _sample_std(x: np.ndarray) -> float:
    # constant series must give exactly 0, not mean-subtraction dust
    if x.min() == x.max():
        return 0.0
    d = x - x.mean()
    return math.sqrt(float(np.dot(d, d)) / (x.size - 1))


def tracking_error(r_p, r_idx, config: BacktestConfig) -> float:
    """Annualized standard deviation (T-1 denominator) of daily differences."""
    a, b = _check_pair(r_p, r_idx)
    return math.sqrt(config.trading_days_per_year) * _sample_std(a - b)


def _pearson(a: np.ndarray, b: np.ndarray) -> float | None:
    if a.min() == a.max() or b.min() == b.max():
        return None
    da = a - a.mean()
    db = b - b.mean()
    saa = float(np.dot(da, da))
    sbb = float(np.dot(db, db))
    if saa == 0.0 or sbb == 0.0:
        return None
    r = float(np.dot(da, db)) / math.sqrt(saa * sbb)
    return min(1.0, max(-1.0, r))


def max_drawdown(r_p) -> float:
    """Largest peak-to-trough equity decline; 0 for a monotone-up curve."""
    a = _as_series(r_p, "portfolio returns")
    equity = np.concatenate([[1.0], np.cumprod(1.0 + a)])
    peak = np.maximum.accumulate(equity)
    return float((equity / peak - 1.0).min())


def compute_metrics(r_p, r_idx, config: BacktestConfig) -> MetricsReport:
    """All report metrics for one method; vanished denominators become None."""
    a, b = _check_pair(r_p, r_idx)
    tdy = config.trading_days_per_year
    rf_daily = config.risk_free_rate / tdy
    ann = math.sqrt(tdy)

    diff = a - b
    sd_diff = _sample_std(diff)
    te = ann * sd_diff

    total_return = float(np.prod(1.0 + a)) - 1.0

    sd = _sample_std(a)
    mean_excess = float(a.mean()) - rf_daily
    sharpe = None if sd == 0.0 else mean_excess / sd * ann

    downside = np.minimum(a - rf_daily, 0.0)
    dd = math.sqrt(float(np.dot(downside, downside)) / (a.size - 1))
    sortino = None if dd == 0.0 else mean_excess / dd * ann

    ir = None if sd_diff == 0.0 else float(diff.mean()) / sd_diff * ann

    return MetricsReport(
        tracking_error=te,
        correlation=_pearson(a, b),
        total_return=total_return,
        sharpe=sharpe,
        sortino=sortino,
        max_drawdown=max_drawdown(a),
        information_ratio=ir,
    )


DM_MIN_OBS = 10


def diebold_mariano(r_p, r_b, r_idx, nw_lags: int = 0) -> DMTestResult:
    """Two-sided DM test on squared tracking-error loss differentials.

    d_t = (r_p - r_idx)^2 - (r_b - r_idx)^2; the statistic is
    mean(d)/sqrt(LRV/T) against a standard normal.  With nw_lags=0 the
    long-run variance is the plain sample variance of d (T-1 denominator);
    positive lags switch to the Bartlett-kernel Newey-West estimator with
    1/T autocovariances.  Swapping the two methods negates d exactly, so the
    statistic flips sign and the p-value is unchanged.
    """
    p = _as_series(r_p, "method returns")
    q = _as_series(r_b, "baseline returns")
    i = _as_series(r_idx, "index returns")
    if not (p.size == q.size == i.size):
        raise ValueError("all three series must have equal length")
    if p.size < DM_MIN_OBS:
        raise InsufficientDataError(
            f"Diebold-Mariano needs at least {DM_MIN_OBS} observations, got {p.size}"
        )
    if nw_lags < 0:
        raise ConfigError("nw_lags must be >= 0")

    d = (p - i) ** 2 - (q - i) ** 2
    if np.all(d == 0.0):
        return DMTestResult(statistic=None, p_value=None, loss_differential_mean=0.0)

    t = d.size
    dbar = float(d.mean())
    centered = d - dbar
    if nw_lags == 0:
        lrv = float(np.dot(centered, centered)) / (t - 1)
    else:
        lrv = float(np.dot(centered, centered)) / t
        for lag in range(1, nw_lags + 1):
            cov = float(np.dot(centered[lag:], centered[:-lag])) / t
            lrv += 2.0 * (1.0 - lag / (nw_lags + 1.0)) * cov
        lrv = max(lrv, 0.0)

    if lrv == 0.0:
        stat = math.inf if dbar > 0 else -math.inf
        return DMTestResult(statistic=stat, p_value=0.0, loss_differential_mean=dbar)
    stat = dbar / math.sqrt(lrv / t)
    pval = 2.0 * float(norm.sf(abs(stat)))
    return DMTestResult(statistic=stat, p_value=pval, loss_differential_mean=dbar)
