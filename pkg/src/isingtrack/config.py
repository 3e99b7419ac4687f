"""Run configuration: a flat key = value text format with full validation.

Grammar (documented in the README):
  - one `key = value` pair per line
  - blank lines and lines starting with `#` are ignored
  - keys are dot-namespaced (e.g. ``sampler.n_chains``); values are bare
    tokens (no quoting); list values are comma-separated
  - every key is optional; omitted keys take their defaults
  - unknown keys, duplicate keys, type mismatches, and range violations are
    all collected and reported together in one error

Relative data paths are resolved against the config file's directory.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .backtest import BacktestConfig
from .errors import ConfigError
from .factors import BiasWeights, CouplingConfig
from .sampler import SamplerConfig
from .selector import SectorConstraints

KNOWN_METHODS = ("ising", "greedy", "robust_mvo", "hrp")
BASELINE_METHODS = ("greedy", "robust_mvo", "hrp")


@dataclass(frozen=True)
class RunConfig:
    """Validated settings for one pipeline run; defaults give a full run."""

    data_prices: Path | None = None
    data_volumes: Path | None = None
    data_index: Path | None = None
    data_vix: Path | None = None
    data_sectors: Path | None = None
    data_split_date: dt.date | None = None

    run_out: Path = Path("out")
    run_methods: tuple = KNOWN_METHODS

    selector_k: int = 30
    selector_max_per_sector_frac: float = 0.25
    selector_min_sectors: int = 6
    selector_weighting: str = "equal"

    bias_w_tracking: float = 3.0
    bias_w_momentum: float = 1.0
    bias_w_liquidity: float = 1.5
    bias_alpha: float = 4.0

    coupling_gamma0: float = 0.5
    coupling_v0: float = 20.0
    coupling_gamma_min: float = 0.1
    coupling_gamma_max: float = 0.8
    coupling_tau: float = 0.5
    coupling_edge_scale: float = 4.0

    sampler_n_chains: int = 8
    sampler_n_temperatures: int = 13
    sampler_warmup_iters: int = 2500
    sampler_samples_per_temp: int = 1000
    sampler_steps_per_sample: int = 45
    sampler_seed: int = 12345
    sampler_blocking: str = "coloring"

    backtest_rebalance_frequency: str = "quarterly"
    backtest_cost_bps: float = 10.0
    backtest_risk_free_rate: float = 0.02
    backtest_trading_days_per_year: int = 252
    backtest_drift: str = "hold"

    dm_nw_lags: int = 0

    # typed sub-config builders used by the pipeline

    def bias_weights(self) -> BiasWeights:
        return BiasWeights(
            w_tracking=self.bias_w_tracking,
            w_momentum=self.bias_w_momentum,
            w_liquidity=self.bias_w_liquidity,
            alpha=self.bias_alpha,
        )

    def coupling_config(self) -> CouplingConfig:
        return CouplingConfig(
            gamma0=self.coupling_gamma0,
            v0=self.coupling_v0,
            gamma_min=self.coupling_gamma_min,
            gamma_max=self.coupling_gamma_max,
            tau=self.coupling_tau,
            edge_scale=self.coupling_edge_scale,
        )

    def sampler_config(self) -> SamplerConfig:
        return SamplerConfig(
            n_chains=self.sampler_n_chains,
            n_temperatures=self.sampler_n_temperatures,
            warmup_iters=self.sampler_warmup_iters,
            samples_per_temp=self.sampler_samples_per_temp,
            steps_per_sample=self.sampler_steps_per_sample,
            seed=self.sampler_seed,
            blocking=self.sampler_blocking,
        )

    def sector_constraints(self) -> SectorConstraints:
        return SectorConstraints(
            max_per_sector_frac=self.selector_max_per_sector_frac,
            min_sectors=self.selector_min_sectors,
        )

    def backtest_config(self) -> BacktestConfig:
        return BacktestConfig(
            rebalance_frequency=self.backtest_rebalance_frequency,
            cost_bps=self.backtest_cost_bps,
            risk_free_rate=self.backtest_risk_free_rate,
            trading_days_per_year=self.backtest_trading_days_per_year,
            drift=self.backtest_drift,
        )


def _parse_int(raw: str):
    try:
        return int(raw, 10)
    except ValueError:
        raise ValueError(f"expected an integer, got {raw!r}") from None


def _parse_float(raw: str):
    try:
        return float(raw)
    except ValueError:
        raise ValueError(f"expected a number, got {raw!r}") from None


def _parse_date(raw: str):
    try:
        return dt.date.fromisoformat(raw)
    except ValueError:
        raise ValueError(f"expected an ISO date (YYYY-MM-DD), got {raw!r}") from None


def _parse_methods(raw: str):
    items = tuple(tok.strip() for tok in raw.split(",") if tok.strip())
    if not items:
        raise ValueError("methods list is empty")
    unknown = [m for m in items if m not in KNOWN_METHODS]
    if unknown:
        raise ValueError(
            f"unknown methods {unknown}; known: {', '.join(KNOWN_METHODS)}"
        )
    if len(set(items)) != len(items):
        raise ValueError("methods list contains duplicates")
    return items


def _choice(options):
    def parse(raw: str):
        if raw not in options:
            raise ValueError(f"expected one of {', '.join(options)}; got {raw!r}")
        return raw

    return parse


# key -> (attribute, parser).  Paths are resolved later against the config
# file directory.
_SCHEMA = {
    "data.prices": ("data_prices", Path),
    "data.volumes": ("data_volumes", Path),
    "data.index": ("data_index", Path),
    "data.vix": ("data_vix", Path),
    "data.sectors": ("data_sectors", Path),
    "data.split_date": ("data_split_date", _parse_date),
    "run.out": ("run_out", Path),
    "run.methods": ("run_methods", _parse_methods),
    "selector.k": ("selector_k", _parse_int),
    "selector.max_per_sector_frac": ("selector_max_per_sector_frac", _parse_float),
    "selector.min_sectors": ("selector_min_sectors", _parse_int),
    "selector.weighting": ("selector_weighting", _choice(("equal", "frequency"))),
    "bias.w_tracking": ("bias_w_tracking", _parse_float),
    "bias.w_momentum": ("bias_w_momentum", _parse_float),
    "bias.w_liquidity": ("bias_w_liquidity", _parse_float),
    "bias.alpha": ("bias_alpha", _parse_float),
    "coupling.gamma0": ("coupling_gamma0", _parse_float),
    "coupling.v0": ("coupling_v0", _parse_float),
    "coupling.gamma_min": ("coupling_gamma_min", _parse_float),
    "coupling.gamma_max": ("coupling_gamma_max", _parse_float),
    "coupling.tau": ("coupling_tau", _parse_float),
    "coupling.edge_scale": ("coupling_edge_scale", _parse_float),
    "sampler.n_chains": ("sampler_n_chains", _parse_int),
    "sampler.n_temperatures": ("sampler_n_temperatures", _parse_int),
    "sampler.warmup_iters": ("sampler_warmup_iters", _parse_int),
    "sampler.samples_per_temp": ("sampler_samples_per_temp", _parse_int),
    "sampler.steps_per_sample": ("sampler_steps_per_sample", _parse_int),
    "sampler.seed": ("sampler_seed", _parse_int),
    "sampler.blocking": ("sampler_blocking", _choice(("coloring", "even_odd"))),
    "backtest.rebalance_frequency": (
        "backtest_rebalance_frequency",
        _choice(("quarterly",)),
    ),
    "backtest.cost_bps": ("backtest_cost_bps", _parse_float),
    "backtest.risk_free_rate": ("backtest_risk_free_rate", _parse_float),
    "backtest.trading_days_per_year": ("backtest_trading_days_per_year", _parse_int),
    "backtest.drift": ("backtest_drift", _choice(("hold", "daily_rebalance"))),
    "dm.nw_lags": ("dm_nw_lags", _parse_int),
}

_PATH_ATTRS = (
    "data_prices",
    "data_volumes",
    "data_index",
    "data_vix",
    "data_sectors",
    "run_out",
)


def _range_errors(cfg: RunConfig) -> list[str]:
    """Cross-field and range checks, every violation reported."""
    errs = []

    def check(cond: bool, msg: str):
        if not cond:
            errs.append(msg)

    check(cfg.selector_k >= 1, "selector.k must be >= 1")
    check(
        0 < cfg.selector_max_per_sector_frac <= 1,
        "selector.max_per_sector_frac must lie in (0, 1]",
    )
    check(cfg.selector_min_sectors >= 1, "selector.min_sectors must be >= 1")
    check(cfg.bias_w_tracking >= 0, "bias.w_tracking must be >= 0")
    check(cfg.bias_w_momentum >= 0, "bias.w_momentum must be >= 0")
    check(cfg.bias_w_liquidity >= 0, "bias.w_liquidity must be >= 0")
    check(cfg.bias_alpha > 0, "bias.alpha must be > 0")
    check(cfg.coupling_gamma_min > 0, "coupling.gamma_min must be > 0")
    check(
        cfg.coupling_gamma_min <= cfg.coupling_gamma0 <= cfg.coupling_gamma_max,
        "need coupling.gamma_min <= coupling.gamma0 <= coupling.gamma_max",
    )
    check(0 <= cfg.coupling_tau < 1, "coupling.tau must lie in [0, 1)")
    check(cfg.coupling_edge_scale > 0, "coupling.edge_scale must be > 0")
    check(cfg.coupling_v0 > 0, "coupling.v0 must be > 0")
    check(cfg.sampler_n_chains >= 1, "sampler.n_chains must be >= 1")
    check(cfg.sampler_n_temperatures >= 2, "sampler.n_temperatures must be >= 2")
    check(cfg.sampler_warmup_iters >= 0, "sampler.warmup_iters must be >= 0")
    check(cfg.sampler_samples_per_temp >= 1, "sampler.samples_per_temp must be >= 1")
    check(cfg.sampler_steps_per_sample >= 1, "sampler.steps_per_sample must be >= 1")
    check(0 <= cfg.sampler_seed < 2**64, "sampler.seed must fit in 64 bits")
    check(cfg.backtest_cost_bps >= 0, "backtest.cost_bps must be >= 0")
    check(
        cfg.backtest_trading_days_per_year >= 1,
        "backtest.trading_days_per_year must be >= 1",
    )
    check(cfg.dm_nw_lags >= 0, "dm.nw_lags must be >= 0")
    return errs


def parse_config(text: str, base_dir: Path | None = None) -> RunConfig:
    """Parse and fully validate config text; every violation is reported."""
    errs: list[str] = []
    values: dict = {}
    seen: set = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            errs.append(f"line {lineno}: expected 'key = value', got {stripped!r}")
            continue
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in _SCHEMA:
            errs.append(f"line {lineno}: unknown key {key!r}")
            continue
        if key in seen:
            errs.append(f"line {lineno}: duplicate key {key!r}")
            continue
        seen.add(key)
        if not raw:
            errs.append(f"line {lineno}: key {key!r} has an empty value")
            continue
        attr, parser = _SCHEMA[key]
        try:
            values[attr] = parser(raw)
        except ValueError as exc:
            errs.append(f"line {lineno}: {key}: {exc}")

    cfg = None
    if not errs:
        cfg = RunConfig(**values)
        if base_dir is not None:
            resolved = {
                a: base_dir / getattr(cfg, a)
                for a in _PATH_ATTRS
                if getattr(cfg, a) is not None and not getattr(cfg, a).is_absolute()
            }
            if resolved:
                cfg = replace(cfg, **resolved)
        errs.extend(_range_errors(cfg))
    else:
        # still report range problems for the fields that did parse
        probe = RunConfig(**values) if _constructible(values) else None
        if probe is not None:
            errs.extend(_range_errors(probe))

    if errs:
        raise ConfigError("invalid configuration:\n  " + "\n  ".join(errs))
    return cfg


def _constructible(values: dict) -> bool:
    names = {f.name for f in fields(RunConfig)}
    return all(k in names for k in values)


def load_config(path) -> RunConfig:
    """Read and validate a config file; paths resolve relative to it."""
    p = Path(path)
    try:
        text = p.read_text()
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {p}") from None
    return parse_config(text, base_dir=p.parent)


def apply_overrides(
    cfg: RunConfig,
    seed: int | None = None,
    out: str | None = None,
    methods=None,
) -> RunConfig:
    """CLI-flag overrides on top of a parsed config."""
    updates: dict = {}
    if seed is not None:
        if not 0 <= seed < 2**64:
            raise ConfigError("--seed must fit in 64 bits")
        updates["sampler_seed"] = seed
    if out is not None:
        updates["run_out"] = Path(out)
    if methods is not None:
        raw = methods if isinstance(methods, str) else ",".join(methods)
        try:
            updates["run_methods"] = _parse_methods(raw)
        except ValueError as exc:
            raise ConfigError(f"--methods: {exc}") from None
    return replace(cfg, **updates) if updates else cfg
