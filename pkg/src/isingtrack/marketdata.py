"""CSV ingestion, aligned return panels, and leak-free train/test splits.

File formats:
  prices.csv / volumes.csv : header ``date,TICK1,TICK2,...``, ISO dates,
                             empty cell = missing observation
  index.csv / vix.csv      : header ``date,value``
  sectors.csv              : header ``ticker,sector`` with sector drawn from
                             the closed 10-label GICS set
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .errors import (
    CoverageError,
    InsufficientDataError,
    ParseError,
    SchemaError,
)

GICS_SECTORS = frozenset(
    {
        "Technology",
        "Healthcare",
        "Financials",
        "Consumer Discretionary",
        "Consumer Staples",
        "Energy",
        "Industrials",
        "Communication Services",
        "Utilities",
        "Real Estate",
    }
)

# longest factor lookback; a training window must cover at least this
MIN_TRAIN_DAYS = 252


@dataclass(frozen=True)
class PricePanel:
    """Aligned price and volume panels (rows = trading days, cols = tickers)."""

    prices: pd.DataFrame
    volumes: pd.DataFrame

    def __post_init__(self):
        if not self.prices.index.equals(self.volumes.index):
            raise SchemaError("price and volume dates differ")
        if list(self.prices.columns) != list(self.volumes.columns):
            raise SchemaError("price and volume tickers differ")
        if not self.prices.index.is_monotonic_increasing or self.prices.index.has_duplicates:
            raise SchemaError("dates must be strictly increasing without duplicates")
        if (self.prices.to_numpy() <= 0).any():
            raise SchemaError("prices must be strictly positive")

    @property
    def dates(self) -> pd.DatetimeIndex:
        return self.prices.index

    @property
    def tickers(self) -> list[str]:
        return list(self.prices.columns)


@dataclass(frozen=True)
class ReturnsPanel:
    """Simple daily returns for assets and the index, with VIX at level.

    All three share one date axis (the intersection of the source
    calendars, minus the first day lost to differencing).
    """

    returns: pd.DataFrame
    index_returns: pd.Series
    vix: pd.Series

    def __post_init__(self):
        if not (
            self.returns.index.equals(self.index_returns.index)
            and self.returns.index.equals(self.vix.index)
        ):
            raise SchemaError("returns, index returns, and vix must share dates")
        if (self.returns.to_numpy() <= -1).any() or (self.index_returns.to_numpy() <= -1).any():
            raise SchemaError("every simple return must exceed -1")

    @property
    def dates(self) -> pd.DatetimeIndex:
        return self.returns.index

    @property
    def tickers(self) -> list[str]:
        return list(self.returns.columns)

    @property
    def n_assets(self) -> int:
        return self.returns.shape[1]

    @property
    def values(self) -> np.ndarray:
        return self.returns.to_numpy(dtype=np.float64)

    @property
    def index_values(self) -> np.ndarray:
        return self.index_returns.to_numpy(dtype=np.float64)

    @property
    def vix_values(self) -> np.ndarray:
        return self.vix.to_numpy(dtype=np.float64)

    def restrict(self, mask) -> "ReturnsPanel":
        """Row-subset by boolean mask or date slice, preserving alignment."""
        return ReturnsPanel(
            returns=self.returns.loc[mask],
            index_returns=self.index_returns.loc[mask],
            vix=self.vix.loc[mask],
        )

    def before(self, date) -> "ReturnsPanel":
        """Strictly earlier history; the walk-forward access primitive."""
        return self.restrict(self.dates < pd.Timestamp(date))


@dataclass(frozen=True)
class SectorMap:
    """Ticker -> GICS sector mapping."""

    mapping: dict

    def sector_of(self, ticker: str) -> str:
        try:
            return self.mapping[ticker]
        except KeyError:
            raise CoverageError(f"ticker {ticker!r} missing from sector map") from None

    def require_coverage(self, tickers) -> None:
        missing = sorted(t for t in tickers if t not in self.mapping)
        if missing:
            raise CoverageError(
                "sector map does not cover: " + ", ".join(missing)
            )

    def sectors_present(self, tickers) -> list[str]:
        return sorted({self.sector_of(t) for t in tickers})


@dataclass(frozen=True)
class SplitDataset:
    """Train/test partition of a ReturnsPanel around split_date.

    split_date is the effective boundary: the first test trading day, so
    max(train.dates) < split_date == min(test.dates).
    """

    train: ReturnsPanel
    test: ReturnsPanel
    split_date: pd.Timestamp

    def __post_init__(self):
        if len(self.train.dates) and self.train.dates.max() >= self.split_date:
            raise SchemaError("training data must end strictly before split_date")
        if len(self.test.dates) == 0 or self.test.dates.min() != self.split_date:
            raise SchemaError("split_date must be the first test date")


def _read_csv_str(path) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise ParseError(f"{path}: file is empty") from None
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise ParseError(f"{path}: {exc}") from None
    if frame.shape[1] < 2:
        raise SchemaError(f"{path}: expected a date column plus data columns")
    return frame


def _parse_dates(raw: pd.Series, path) -> pd.DatetimeIndex:
    parsed = pd.to_datetime(raw, format="%Y-%m-%d", errors="coerce")
    bad = parsed.isna()
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0])
        raise ParseError(
            f"{path}: row {row + 2}, column 'date': "
            f"cannot parse {raw.iloc[row]!r} as YYYY-MM-DD"
        )
    idx = pd.DatetimeIndex(parsed)
    if idx.has_duplicates:
        dup = idx[idx.duplicated()][0]
        raise SchemaError(f"{path}: duplicate date {dup.date()}")
    if not idx.is_monotonic_increasing:
        raise SchemaError(f"{path}: dates must be strictly increasing")
    return idx


def _parse_numeric(frame: pd.DataFrame, path) -> pd.DataFrame:
    """Convert data columns to float; empty cells become NaN; name bad cells."""
    out = {}
    for col in frame.columns:
        raw = frame[col]
        empty = raw.str.strip() == ""
        values = pd.to_numeric(raw.mask(empty), errors="coerce")
        bad = values.isna() & ~empty
        if bad.any():
            row = int(np.flatnonzero(bad.to_numpy())[0])
            raise ParseError(
                f"{path}: row {row + 2}, column {col!r}: "
                f"cannot parse {raw.iloc[row]!r} as a number"
            )
        out[col] = values.astype(np.float64)
    return pd.DataFrame(out, index=frame.index)


def _load_wide_csv(path) -> pd.DataFrame:
    frame = _read_csv_str(path)
    if frame.columns[0] != "date":
        raise SchemaError(f"{path}: first column must be 'date'")
    dates = _parse_dates(frame["date"], path)
    data = _parse_numeric(frame.drop(columns="date"), path)
    data.index = dates
    data.index.name = "date"
    return data


def load_price_panel(prices_path, volumes_path) -> PricePanel:
    """Load and align prices and volumes.

    Interior and trailing gaps are forward-filled per asset; leading rows
    where any asset has no price yet are dropped so the panel starts at the
    first date on which every asset trades.  Volumes are aligned to the
    resulting dates (forward-filled, residual gaps as zero volume).
    """
    prices = _load_wide_csv(prices_path)
    volumes = _load_wide_csv(volumes_path)
    if set(prices.columns) != set(volumes.columns):
        only_p = sorted(set(prices.columns) - set(volumes.columns))
        only_v = sorted(set(volumes.columns) - set(prices.columns))
        raise SchemaError(
            f"ticker mismatch between {prices_path} and {volumes_path}: "
            f"only in prices {only_p}, only in volumes {only_v}"
        )
    volumes = volumes[prices.columns]

    present = prices.notna()
    nonpositive = (prices <= 0) & present
    if nonpositive.to_numpy().any():
        r, c = np.argwhere(nonpositive.to_numpy())[0]
        raise SchemaError(
            f"{prices_path}: non-positive price for {prices.columns[c]!r} "
            f"on {prices.index[r].date()}"
        )

    all_present = present.all(axis=1)
    if not all_present.any():
        raise InsufficientDataError(
            "no date on which every asset has a price; cannot align panel"
        )
    start = all_present.idxmax()
    prices = prices.loc[start:].ffill()
    volumes = volumes.reindex(prices.index).ffill().fillna(0.0)
    if (volumes.to_numpy() < 0).any():
        raise SchemaError(f"{volumes_path}: volumes must be non-negative")
    return PricePanel(prices=prices, volumes=volumes)


def load_value_series(path, name: str = "value") -> pd.Series:
    """Load a two-column date,value CSV into a Series."""
    data = _load_wide_csv(path)
    if data.shape[1] != 1:
        raise SchemaError(f"{path}: expected exactly one value column")
    series = data.iloc[:, 0]
    if series.isna().any():
        missing = series.index[series.isna()][0]
        raise ParseError(f"{path}: missing value on {missing.date()}")
    series.name = name
    return series


def compute_returns(panel: PricePanel, index_prices: pd.Series, vix_levels: pd.Series) -> ReturnsPanel:
    """Simple daily returns for assets and index, aligned with VIX levels.

    Alignment is the intersection of the three calendars; the first common
    date is consumed by differencing.  VIX is carried at level, not
    differenced.
    """
    common = panel.dates.intersection(index_prices.index).intersection(vix_levels.index)
    if len(common) < 2:
        raise InsufficientDataError(
            f"only {len(common)} dates shared by prices, index, and vix; need at least 2"
        )
    prices = panel.prices.loc[common]
    idx = index_prices.loc[common].astype(np.float64)
    if (idx <= 0).any():
        raise SchemaError("index prices must be strictly positive")
    returns = prices.to_numpy()[1:] / prices.to_numpy()[:-1] - 1.0
    index_returns = idx.to_numpy()[1:] / idx.to_numpy()[:-1] - 1.0
    dates = common[1:]
    return ReturnsPanel(
        returns=pd.DataFrame(returns, index=dates, columns=panel.tickers),
        index_returns=pd.Series(index_returns, index=dates, name="index"),
        vix=vix_levels.loc[dates].astype(np.float64).rename("vix"),
    )


def split_train_test(panel: ReturnsPanel, split_date) -> SplitDataset:
    """Partition a ReturnsPanel at split_date without shared dates.

    A split_date that is not a trading day moves forward to the next one.
    The training side must cover the longest factor lookback (252 days).
    """
    ts = pd.Timestamp(split_date)
    dates = panel.dates
    if ts < dates.min() or ts > dates.max():
        raise InsufficientDataError(
            f"split date {ts.date()} outside panel range "
            f"[{dates.min().date()}, {dates.max().date()}]"
        )
    test_mask = dates >= ts
    effective = dates[test_mask].min()
    train = panel.restrict(dates < effective)
    test = panel.restrict(test_mask)
    if len(train.dates) < MIN_TRAIN_DAYS:
        raise InsufficientDataError(
            f"training window has {len(train.dates)} days; "
            f"need at least {MIN_TRAIN_DAYS}"
        )
    return SplitDataset(train=train, test=test, split_date=effective)


def load_sector_map(path) -> SectorMap:
    """Load ticker,sector rows; labels restricted to the 10 GICS sectors.

    Duplicate rows with identical sectors are deduplicated; conflicting
    duplicates are an error.
    """
    mapping: dict = {}
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise ParseError(f"{path}: file is empty")
            if [h.strip() for h in header[:2]] != ["ticker", "sector"]:
                raise SchemaError(f"{path}: header must be 'ticker,sector'")
            for lineno, rowvals in enumerate(reader, start=2):
                if not rowvals or all(not v.strip() for v in rowvals):
                    continue
                if len(rowvals) < 2:
                    raise ParseError(f"{path}: row {lineno}: expected 'ticker,sector'")
                ticker, sector = rowvals[0].strip(), rowvals[1].strip()
                if sector not in GICS_SECTORS:
                    raise SchemaError(
                        f"{path}: row {lineno}: unknown sector {sector!r}; "
                        f"allowed: {', '.join(sorted(GICS_SECTORS))}"
                    )
                if ticker in mapping and mapping[ticker] != sector:
                    raise SchemaError(
                        f"{path}: row {lineno}: ticker {ticker!r} mapped to both "
                        f"{mapping[ticker]!r} and {sector!r}"
                    )
                mapping[ticker] = sector
    except FileNotFoundError:
        raise
    if not mapping:
        raise ParseError(f"{path}: no ticker rows found")
    return SectorMap(mapping=mapping)
