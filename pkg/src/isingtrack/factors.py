"""Per-asset factor scores, bias vector, and the VIX-adaptive coupling graph.

Biases reward index-tracking quality, momentum, and liquidity; couplings
penalise co-selection of highly correlated pairs, with an overall strength
that decays as volatility (VIX) rises and is clamped to a fixed band.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateDataError, InsufficientDataError
from .marketdata import ReturnsPanel

MOMENTUM_LOOKBACK = 252   # trading days
MOMENTUM_EXCLUSION = 21   # most recent days excluded (short-term reversal)


@dataclass(frozen=True)
class FactorScores:
    """Per-asset inputs to the bias vector; arrays share one asset order."""

    correlation: np.ndarray       # rho_i in [-1, 1]
    beta: np.ndarray              # regression beta vs the index
    tracking_quality: np.ndarray  # rho_i * exp(-|beta_i - 1|)
    momentum: np.ndarray          # min-max normalized to [0, 1]
    liquidity: np.ndarray         # max-normalized to [0, 1]

    def __post_init__(self):
        n = self.correlation.size
        for name in ("beta", "tracking_quality", "momentum", "liquidity"):
            if getattr(self, name).size != n:
                raise ValueError("factor arrays must share one length")
        if np.any(self.momentum < 0) or np.any(self.momentum > 1):
            raise ValueError("momentum must lie in [0, 1]")
        if np.any(self.liquidity < 0) or np.any(self.liquidity > 1):
            raise ValueError("liquidity must lie in [0, 1]")
        if np.any(np.abs(self.tracking_quality) > np.abs(self.correlation) + 1e-12):
            raise ValueError("|tracking_quality| cannot exceed |correlation|")


@dataclass(frozen=True)
class BiasWeights:
    """Weights of the three factors and the overall bias scale."""

    w_tracking: float = 3.0
    w_momentum: float = 1.0
    w_liquidity: float = 1.5
    alpha: float = 4.0

    def __post_init__(self):
        for name in ("w_tracking", "w_momentum", "w_liquidity"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if not self.alpha > 0:
            raise ConfigError("alpha must be > 0")


@dataclass(frozen=True)
class CouplingConfig:
    """Coupling strength curve and edge construction parameters."""

    gamma0: float = 0.5
    v0: float = 20.0
    gamma_min: float = 0.1
    gamma_max: float = 0.8
    tau: float = 0.5
    edge_scale: float = 4.0

    def __post_init__(self):
        if not 0 < self.gamma_min <= self.gamma0 <= self.gamma_max:
            raise ConfigError(
                "need 0 < gamma_min <= gamma0 <= gamma_max, got "
                f"gamma_min={self.gamma_min}, gamma0={self.gamma0}, gamma_max={self.gamma_max}"
            )
        if not 0 <= self.tau < 1:
            raise ConfigError(f"tau must lie in [0, 1), got {self.tau}")
        if not self.edge_scale > 0:
            raise ConfigError("edge_scale must be > 0")
        if not self.v0 > 0:
            raise ConfigError("v0 must be > 0")


@dataclass(frozen=True)
class CouplingGraph:
    """Sparse undirected coupling edges over n assets, canonical i < j."""

    n: int
    row: np.ndarray     # int64
    col: np.ndarray     # int64
    weight: np.ndarray  # float64

    @property
    def n_edges(self) -> int:
        return int(self.weight.size)


def asset_index_stats(asset_returns, index_returns) -> tuple[float, float]:
    """Pearson correlation and regression beta of one asset vs the index.

    A zero-variance asset gets (rho, beta) = (0, 0): it carries no tracking
    signal but should not crash the pipeline.  A zero-variance index is a
    degenerate benchmark and always an error.
    """
    a = np.asarray(asset_returns, dtype=np.float64)
    b = np.asarray(index_returns, dtype=np.float64)
    if a.ndim != 1 or b.ndim != 1 or a.size != b.size:
        raise ValueError("asset and index series must be 1-d and equally long")
    if a.size < 2:
        raise InsufficientDataError("need at least 2 observations")
    da = a - a.mean()
    db = b - b.mean()
    var_idx = float(np.dot(db, db))
    if var_idx == 0.0:
        raise DegenerateDataError("benchmark index has zero variance")
    var_a = float(np.dot(da, da))
    cov = float(np.dot(da, db))
    beta = cov / var_idx
    if var_a == 0.0:
        return 0.0, 0.0
    rho = cov / math.sqrt(var_a * var_idx)
    return rho, beta


def tracking_quality(rho, beta):
    """TQ = rho * exp(-|beta - 1|): co-movement discounted by beta distance."""
    rho = np.asarray(rho, dtype=np.float64)
    if np.any(np.abs(rho) > 1.0 + 1e-12):
        raise ValueError("correlation must lie in [-1, 1]")
    out = rho * np.exp(-np.abs(np.asarray(beta, dtype=np.float64) - 1.0))
    return float(out) if out.ndim == 0 else out


def momentum_scores(panel: ReturnsPanel) -> np.ndarray:
    """Cross-sectionally min-max normalized momentum in [0, 1].

    Raw score is the mean daily return over rows [T-252, T-21), skipping the
    most recent month.  When all raw scores coincide the normalization is
    degenerate and every asset maps to 0.5.
    """
    r = panel.values
    t = r.shape[0]
    if t < MOMENTUM_LOOKBACK:
        raise InsufficientDataError(
            f"momentum needs {MOMENTUM_LOOKBACK} trading days, panel has {t}"
        )
    window = r[t - MOMENTUM_LOOKBACK : t - MOMENTUM_EXCLUSION]
    raw = window.mean(axis=0)
    return minmax_normalize(raw)


def minmax_normalize(raw: np.ndarray) -> np.ndarray:
    """Min-max to [0, 1]; a constant vector maps to all 0.5."""
    raw = np.asarray(raw, dtype=np.float64)
    lo, hi = raw.min(), raw.max()
    if hi == lo:
        return np.full(raw.shape, 0.5)
    return (raw - lo) / (hi - lo)


def liquidity_scores(volumes) -> np.ndarray:
    """Average volume per asset divided by the largest average, in (0, 1].

    Accepts a DataFrame or 2-d array with one column per asset.
    """
    v = np.asarray(volumes, dtype=np.float64)
    if v.ndim == 1:
        v = v[:, None]
    if v.shape[0] < 1:
        raise InsufficientDataError("need at least one day of volume data")
    if np.any(v < 0):
        raise ValueError("volumes must be non-negative")
    avg = v.mean(axis=0)
    top = avg.max()
    if top == 0.0:
        raise DegenerateDataError("all volumes are zero; liquidity undefined")
    return avg / top


def compute_factor_scores(panel: ReturnsPanel, volumes) -> FactorScores:
    """Assemble all factor scores for one estimation window."""
    r = panel.values
    idx = panel.index_values
    n = r.shape[1]
    rho = np.empty(n)
    beta = np.empty(n)
    for i in range(n):
        rho[i], beta[i] = asset_index_stats(r[:, i], idx)
    return FactorScores(
        correlation=rho,
        beta=beta,
        tracking_quality=tracking_quality(rho, beta),
        momentum=momentum_scores(panel),
        liquidity=liquidity_scores(volumes),
    )


def compute_biases(scores: FactorScores, weights: BiasWeights) -> np.ndarray:
    """Bias magnitude m_i = alpha * (w_T*TQ_i + w_M*Mom_i + w_L*Liq_i).

    Higher m_i strictly increases the selection probability of asset i at
    fixed couplings (it lowers the energy of states that include i).
    """
    return weights.alpha * (
        weights.w_tracking * scores.tracking_quality
        + weights.w_momentum * scores.momentum
        + weights.w_liquidity * scores.liquidity
    )


def dynamic_coupling_strength(vix: float, config: CouplingConfig) -> float:
    """gamma = clamp(gamma0 * exp(-(V/V0 - 1)/2), gamma_min, gamma_max).

    Monotone non-increasing in VIX: calm regimes couple strongly (more
    diversification pressure), stressed regimes relax toward gamma_min.
    """
    if not vix > 0:
        raise ValueError(f"VIX level must be positive, got {vix}")
    raw = config.gamma0 * math.exp(-0.5 * (vix / config.v0 - 1.0))
    return min(max(raw, config.gamma_min), config.gamma_max)


def correlation_matrix(panel: ReturnsPanel) -> np.ndarray:
    """Pearson correlation of asset returns: symmetric, unit diagonal.

    Zero-variance assets get zero off-diagonal correlation (they carry no
    co-movement signal) while keeping the unit diagonal.
    """
    r = panel.values
    if r.shape[0] < 2:
        raise InsufficientDataError("need at least 2 rows for correlations")
    d = r - r.mean(axis=0)
    cov = d.T @ d
    sd = np.sqrt(np.diag(cov))
    with np.errstate(divide="ignore", invalid="ignore"):
        corr = cov / np.outer(sd, sd)
    degenerate = sd == 0.0
    if np.any(degenerate):
        corr[degenerate, :] = 0.0
        corr[:, degenerate] = 0.0
    corr = np.clip(corr, -1.0, 1.0)
    corr = 0.5 * (corr + corr.T)
    np.fill_diagonal(corr, 1.0)
    return corr


def build_couplings(corr: np.ndarray, gamma: float, config: CouplingConfig) -> CouplingGraph:
    """Edges over pairs i<j with |rho_ij| > tau, weight gamma*rho_ij*edge_scale."""
    c = np.asarray(corr, dtype=np.float64)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValueError("correlation matrix must be square")
    n = c.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    vals = c[iu, ju]
    keep = np.abs(vals) > config.tau
    return CouplingGraph(
        n=n,
        row=iu[keep].astype(np.int64),
        col=ju[keep].astype(np.int64),
        weight=gamma * vals[keep] * config.edge_scale,
    )
