"""Walk-forward orchestration: data -> factors -> model -> sample -> select
-> backtest, with every selection decision restricted to strictly earlier
data through an access-logged history window.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np
import pandas as pd

from .backtest import (
    DMTestResult,
    EquityCurve,
    MetricsReport,
    compute_metrics,
    diebold_mariano,
    run_backtest,
)
from .baselines import greedy_correlation_select, hrp_select, robust_mvo_select
from .config import RunConfig
from .errors import ConfigError, InfeasibleError, LookAheadError
from .factors import (
    build_couplings,
    compute_biases,
    compute_factor_scores,
    correlation_matrix,
    dynamic_coupling_strength,
)
from .ising import IsingModel
from .marketdata import (
    ReturnsPanel,
    SectorMap,
    compute_returns,
    load_price_panel,
    load_sector_map,
    load_value_series,
    split_train_test,
)
from .sampler import SelectionFrequencies, build_annealing_schedule, run_chains
from .selector import Selection, sector_balanced_select, sector_counts

logger = logging.getLogger(__name__)

COUPLING_CURVE_VIX_RANGE = (10.0, 50.0)
COUPLING_CURVE_VIX_STEP = 0.5


class MarketHistory:
    """Clamped, access-logged view of the full aligned market history.

    ``window(asof)`` returns only rows dated strictly before ``asof``.  The
    backtest sets ``allowed_max`` to each rebalance date before invoking the
    selection pipeline, so a pipeline asking for a later as-of date fails
    hard.  Every request is logged as (asof, latest date actually returned)
    for the leak audit.
    """

    def __init__(self, panel: ReturnsPanel, volumes: pd.DataFrame):
        if not panel.dates.isin(volumes.index).all():
            raise ValueError("volume history must cover all return dates")
        self._panel = panel
        self._volumes = volumes.loc[panel.dates]
        self.allowed_max: pd.Timestamp | None = None
        self.access_log: list[tuple[pd.Timestamp, pd.Timestamp | None]] = []

    def window(self, asof) -> tuple[ReturnsPanel, pd.DataFrame]:
        asof = pd.Timestamp(asof)
        if self.allowed_max is not None and asof > self.allowed_max:
            raise LookAheadError(
                f"history requested as of {asof.date()} but only data before "
                f"{self.allowed_max.date()} may be used"
            )
        mask = self._panel.dates < asof
        sub = self._panel.restrict(mask)
        vols = self._volumes.loc[mask]
        last = sub.dates.max() if len(sub.dates) else None
        self.access_log.append((asof, last))
        return sub, vols


@dataclass(frozen=True)
class FrequencyRecord:
    """Sampled frequencies behind one rebalance of the Ising method."""

    date: pd.Timestamp
    tickers: tuple
    frequencies: SelectionFrequencies
    selection: Selection


@dataclass(frozen=True)
class ReportBundle:
    """Everything the report files are rendered from."""

    methods: tuple
    test_dates: pd.DatetimeIndex
    equity: dict            # method -> EquityCurve
    metrics: dict           # method -> MetricsReport
    sector_tables: dict     # method -> {sector: count} at first rebalance
    phase3_flags: dict      # method -> bool (any rebalance relaxed the cap)
    dm: dict                # "a_vs_b" -> DMTestResult
    frequency_records: tuple
    coupling_curve: np.ndarray   # [n, 2] columns (vix, gamma)
    index_total_return: float
    sectors: SectorMap
    access_log: tuple

    def __post_init__(self):
        for table in (self.equity, self.metrics, self.sector_tables):
            if tuple(table.keys()) != self.methods:
                raise ValueError("every requested method must appear exactly once")


def derive_rebalance_seed(root_seed: int, rebalance_index: int) -> int:
    """Deterministic per-rebalance sampler seed from the root seed."""
    ss = np.random.SeedSequence([root_seed, rebalance_index])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def ising_frequencies(
    panel: ReturnsPanel, volumes: pd.DataFrame, cfg: RunConfig, seed: int
) -> SelectionFrequencies:
    """Factor scores -> biases/couplings -> annealed Gibbs frequencies."""
    coupling_cfg = cfg.coupling_config()
    scores = compute_factor_scores(panel, volumes)
    biases = compute_biases(scores, cfg.bias_weights())
    vix_mean = float(panel.vix_values.mean())
    gamma = dynamic_coupling_strength(vix_mean, coupling_cfg)
    corr = correlation_matrix(panel)
    graph = build_couplings(corr, gamma, coupling_cfg)
    model = IsingModel.from_edges(
        biases, zip(graph.row.tolist(), graph.col.tolist(), graph.weight.tolist())
    )
    logger.info(
        "ising model: n=%d edges=%d gamma=%.4f (mean VIX %.2f)",
        model.n, model.n_edges, gamma, vix_mean,
    )
    sampler_cfg = replace(cfg.sampler_config(), seed=seed)
    schedule = build_annealing_schedule(sampler_cfg.n_temperatures)
    return run_chains(model, schedule, sampler_cfg)


def make_method_pipeline(
    method: str,
    history: MarketHistory,
    sectors: SectorMap,
    cfg: RunConfig,
    freq_sink: list | None = None,
):
    """Selection callable bound to a walk-forward history window."""
    k = cfg.selector_k

    if method == "ising":
        counter = {"i": 0}

        def pipeline(asof) -> Selection:
            panel, volumes = history.window(asof)
            seed = derive_rebalance_seed(cfg.sampler_seed, counter["i"])
            counter["i"] += 1
            freqs = ising_frequencies(panel, volumes, cfg, seed)
            sel = sector_balanced_select(
                panel.tickers, freqs.freq, sectors, k,
                cfg.sector_constraints(), cfg.selector_weighting,
            )
            if freq_sink is not None:
                freq_sink.append(
                    FrequencyRecord(
                        date=pd.Timestamp(asof),
                        tickers=tuple(panel.tickers),
                        frequencies=freqs,
                        selection=sel,
                    )
                )
            return sel

        return pipeline

    base_fns = {
        "greedy": greedy_correlation_select,
        "robust_mvo": robust_mvo_select,
        "hrp": hrp_select,
    }
    try:
        fn = base_fns[method]
    except KeyError:
        raise ConfigError(f"unknown method {method!r}") from None

    def pipeline(asof) -> Selection:
        panel, _ = history.window(asof)
        return fn(panel, k)

    return pipeline


def load_market_data(cfg: RunConfig):
    """Load and align all inputs; returns (returns_panel, volumes, sectors)."""
    missing = [
        key
        for key, attr in (
            ("data.prices", cfg.data_prices),
            ("data.volumes", cfg.data_volumes),
            ("data.index", cfg.data_index),
            ("data.vix", cfg.data_vix),
            ("data.sectors", cfg.data_sectors),
        )
        if attr is None
    ]
    if missing:
        raise ConfigError("missing required data paths: " + ", ".join(missing))
    panel = load_price_panel(cfg.data_prices, cfg.data_volumes)
    index_prices = load_value_series(cfg.data_index, "index")
    vix = load_value_series(cfg.data_vix, "vix")
    returns = compute_returns(panel, index_prices, vix)
    sectors = load_sector_map(cfg.data_sectors)
    sectors.require_coverage(returns.tickers)
    if cfg.selector_k > returns.n_assets:
        raise InfeasibleError(
            f"selector.k={cfg.selector_k} exceeds universe size {returns.n_assets}"
        )
    volumes = panel.volumes.loc[panel.volumes.index.isin(returns.dates)]
    return returns, volumes, sectors


def coupling_curve_samples(cfg: RunConfig) -> np.ndarray:
    """(VIX, gamma) pairs over VIX in [10, 50] at 0.5 steps, clamp included."""
    lo, hi = COUPLING_CURVE_VIX_RANGE
    coupling_cfg = cfg.coupling_config()
    vix = np.arange(lo, hi + COUPLING_CURVE_VIX_STEP / 2, COUPLING_CURVE_VIX_STEP)
    gam = np.array([dynamic_coupling_strength(v, coupling_cfg) for v in vix])
    return np.column_stack([vix, gam])


def compute_bundle(cfg: RunConfig) -> ReportBundle:
    """Run the full walk-forward protocol for every requested method."""
    if cfg.data_split_date is None:
        raise ConfigError("data.split_date is required for a backtest run")
    returns, volumes, sectors = load_market_data(cfg)
    split = split_train_test(returns, cfg.data_split_date)
    history = MarketHistory(returns, volumes)
    backtest_cfg = cfg.backtest_config()

    equity: dict = {}
    metrics: dict = {}
    tables: dict = {}
    phase3: dict = {}
    freq_records: list = []
    for method in cfg.run_methods:
        sink = freq_records if method == "ising" else None
        pipe = make_method_pipeline(method, history, sectors, cfg, freq_sink=sink)
        logger.info("backtesting method %s", method)
        curve = run_backtest(pipe, split, backtest_cfg, history=history)
        equity[method] = curve
        metrics[method] = compute_metrics(
            curve.portfolio_returns, curve.index_returns, backtest_cfg
        )
        first_sel = curve.holdings_log[0][1]
        tables[method] = sector_counts(first_sel, sectors)
        phase3[method] = any(sel.phase3_relaxed for _, sel in curve.holdings_log)

    dm: dict = {}
    for a_pos, a in enumerate(cfg.run_methods):
        for b in cfg.run_methods[a_pos + 1 :]:
            dm[f"{a}_vs_{b}"] = diebold_mariano(
                equity[a].portfolio_returns,
                equity[b].portfolio_returns,
                split.test.index_values,
                nw_lags=cfg.dm_nw_lags,
            )

    index_total = float(np.prod(1.0 + split.test.index_values)) - 1.0
    return ReportBundle(
        methods=tuple(cfg.run_methods),
        test_dates=split.test.dates,
        equity=equity,
        metrics=metrics,
        sector_tables=tables,
        phase3_flags=phase3,
        dm=dm,
        frequency_records=tuple(freq_records),
        coupling_curve=coupling_curve_samples(cfg),
        index_total_return=index_total,
        sectors=sectors,
        access_log=tuple(history.access_log),
    )


def train_frequency_record(cfg: RunConfig) -> tuple[FrequencyRecord, SectorMap]:
    """Frequencies and selection at the split date from training data only.

    Matches the first rebalance of a full run bit-for-bit (same sub-seed).
    """
    if cfg.data_split_date is None:
        raise ConfigError("data.split_date is required")
    returns, volumes, sectors = load_market_data(cfg)
    split = split_train_test(returns, cfg.data_split_date)
    history = MarketHistory(returns, volumes)
    history.allowed_max = split.split_date
    panel, vols = history.window(split.split_date)
    freqs = ising_frequencies(panel, vols, cfg, derive_rebalance_seed(cfg.sampler_seed, 0))
    sel = sector_balanced_select(
        panel.tickers, freqs.freq, sectors, cfg.selector_k,
        cfg.sector_constraints(), cfg.selector_weighting,
    )
    record = FrequencyRecord(
        date=split.split_date,
        tickers=tuple(panel.tickers),
        frequencies=freqs,
        selection=sel,
    )
    return record, sectors
