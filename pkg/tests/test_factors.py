import math

import numpy as np
import pandas as pd
import pytest

from isingtrack.errors import ConfigError, DegenerateDataError, InsufficientDataError
from isingtrack.factors import (
    BiasWeights,
    CouplingConfig,
    FactorScores,
    asset_index_stats,
    build_couplings,
    compute_biases,
    correlation_matrix,
    dynamic_coupling_strength,
    liquidity_scores,
    minmax_normalize,
    momentum_scores,
    tracking_quality,
)
from isingtrack.marketdata import ReturnsPanel


def panel_from_matrix(values, tickers=None, start="2020-01-01"):
    values = np.asarray(values, dtype=np.float64)
    t, n = values.shape
    tickers = tickers or [f"A{i}" for i in range(n)]
    dates = pd.bdate_range(start, periods=t)
    return ReturnsPanel(
        returns=pd.DataFrame(values, index=dates, columns=tickers),
        index_returns=pd.Series(values.mean(axis=1), index=dates),
        vix=pd.Series(np.full(t, 18.0), index=dates),
    )


def test_asset_index_stats_self():
    r = np.array([0.01, -0.02, 0.005, 0.03])
    rho, beta = asset_index_stats(r, r)
    assert rho == pytest.approx(1.0, abs=1e-12)
    assert beta == pytest.approx(1.0, abs=1e-12)


def test_asset_index_stats_scaled():
    r = np.array([0.01, -0.02, 0.005, 0.03])
    rho, beta = asset_index_stats(2 * r, r)
    assert rho == pytest.approx(1.0, abs=1e-12)
    assert beta == pytest.approx(2.0, abs=1e-12)


def test_asset_index_stats_sign_flip():
    r = np.array([0.01, -0.02, 0.005, 0.03])
    rho, beta = asset_index_stats(-r, r)
    assert rho == pytest.approx(-1.0, abs=1e-12)
    assert beta == pytest.approx(-1.0, abs=1e-12)


def test_asset_index_stats_degenerate_cases():
    flat = np.zeros(5)
    varying = np.array([0.01, -0.01, 0.02, 0.0, -0.02])
    with pytest.raises(DegenerateDataError):
        asset_index_stats(varying, flat)
    rho, beta = asset_index_stats(flat, varying)
    assert rho == 0.0 and beta == 0.0


def test_tracking_quality_values():
    assert tracking_quality(1.0, 1.0) == 1.0
    assert tracking_quality(1.0, 2.0) == pytest.approx(math.exp(-1.0))
    assert tracking_quality(0.0, 7.3) == 0.0
    # symmetric decay around beta = 1
    assert tracking_quality(0.8, 0.6) == pytest.approx(tracking_quality(0.8, 1.4))


def test_tracking_quality_peaks_at_unit_beta():
    betas = np.linspace(-1.0, 3.0, 41)
    vals = [tracking_quality(0.8, b) for b in betas]
    assert max(vals) == pytest.approx(tracking_quality(0.8, 1.0))


def test_minmax_normalize():
    assert minmax_normalize(np.array([0.001, 0.003])).tolist() == [0.0, 1.0]
    assert minmax_normalize(np.array([0.001, 0.002, 0.003])).tolist() == [0.0, 0.5, 1.0]
    assert minmax_normalize(np.array([0.2, 0.2, 0.2])).tolist() == [0.5, 0.5, 0.5]


def test_momentum_uses_lagged_window_only():
    # poison the exclusion month and the pre-window tail with huge returns;
    # ranking must be driven by the [T-252, T-21) window alone
    t, n = 300, 3
    vals = np.zeros((t, n))
    window = slice(t - 252, t - 21)
    vals[window, 0] = 0.0
    vals[window, 1] = 0.001
    vals[window, 2] = 0.002
    vals[t - 21 :, 0] = 0.5       # recent month, must be ignored
    vals[: t - 252, 2] = -0.5     # stale history, must be ignored
    scores = momentum_scores(panel_from_matrix(vals))
    assert scores.tolist() == [0.0, 0.5, 1.0]


def test_momentum_requires_full_lookback():
    with pytest.raises(InsufficientDataError):
        momentum_scores(panel_from_matrix(np.zeros((200, 2))))


def test_liquidity_scores():
    vols = pd.DataFrame({"A": [100.0, 100.0], "B": [400.0, 400.0]})
    assert liquidity_scores(vols).tolist() == [0.25, 1.0]
    equal = pd.DataFrame({"A": [50.0], "B": [50.0]})
    assert liquidity_scores(equal).tolist() == [1.0, 1.0]
    single = pd.DataFrame({"A": [123.0]})
    assert liquidity_scores(single).tolist() == [1.0]
    with pytest.raises(DegenerateDataError):
        liquidity_scores(pd.DataFrame({"A": [0.0], "B": [0.0]}))


def test_bias_magnitude_pinned_example():
    scores = FactorScores(
        correlation=np.array([1.0]),
        beta=np.array([1.0]),
        tracking_quality=np.array([1.0]),
        momentum=np.array([1.0]),
        liquidity=np.array([1.0]),
    )
    weights = BiasWeights(w_tracking=3.0, w_momentum=1.0, w_liquidity=1.5, alpha=4.0)
    assert compute_biases(scores, weights).tolist() == [22.0]


def test_bias_zero_scores_zero_bias():
    scores = FactorScores(
        correlation=np.zeros(2),
        beta=np.zeros(2),
        tracking_quality=np.zeros(2),
        momentum=np.zeros(2),
        liquidity=np.zeros(2),
    )
    weights = BiasWeights(w_tracking=3.0, w_momentum=1.0, w_liquidity=1.5, alpha=4.0)
    assert compute_biases(scores, weights).tolist() == [0.0, 0.0]


def test_bias_tracking_only():
    scores = FactorScores(
        correlation=np.array([0.5]),
        beta=np.array([1.0]),
        tracking_quality=np.array([0.5]),
        momentum=np.array([0.0]),
        liquidity=np.array([0.0]),
    )
    weights = BiasWeights(w_tracking=3.0, w_momentum=0.0, w_liquidity=0.0, alpha=4.0)
    assert compute_biases(scores, weights).tolist() == [6.0]


def test_bias_monotone_in_each_score():
    rng = np.random.default_rng(5)
    weights = BiasWeights(w_tracking=3.0, w_momentum=1.0, w_liquidity=1.5, alpha=4.0)
    for _ in range(50):
        tq = rng.uniform(-1, 1)
        mom, liq = rng.uniform(0, 1, 2)
        base = FactorScores(
            correlation=np.array([1.0]),
            beta=np.array([1.0]),
            tracking_quality=np.array([tq]),
            momentum=np.array([mom]),
            liquidity=np.array([liq]),
        )
        b0 = compute_biases(base, weights)[0]
        for field, hi in (("tracking_quality", 1.0), ("momentum", 1.0), ("liquidity", 1.0)):
            bumped = {
                "correlation": np.array([1.0]),
                "beta": np.array([1.0]),
                "tracking_quality": np.array([tq]),
                "momentum": np.array([mom]),
                "liquidity": np.array([liq]),
            }
            old = bumped[field][0]
            bumped[field] = np.array([min(hi, old + 0.25)])
            b1 = compute_biases(FactorScores(**bumped), weights)[0]
            assert b1 >= b0 - 1e-15


def test_factor_scores_validation():
    with pytest.raises(ValueError):
        FactorScores(
            correlation=np.array([0.5]),
            beta=np.array([1.0]),
            tracking_quality=np.array([0.9]),  # |TQ| may not exceed |rho|
            momentum=np.array([0.5]),
            liquidity=np.array([0.5]),
        )
    with pytest.raises(ValueError):
        FactorScores(
            correlation=np.array([1.0]),
            beta=np.array([1.0]),
            tracking_quality=np.array([1.0]),
            momentum=np.array([1.5]),
            liquidity=np.array([0.5]),
        )


DEFAULTS = CouplingConfig(
    gamma0=0.5, v0=20.0, gamma_min=0.1, gamma_max=0.8, tau=0.5, edge_scale=4.0
)


def test_coupling_strength_at_reference_vix():
    assert dynamic_coupling_strength(20.0, DEFAULTS) == 0.5


def test_coupling_strength_calm_market_value():
    gamma = dynamic_coupling_strength(18.5, DEFAULTS)
    assert gamma == pytest.approx(0.5 * math.exp(-0.5 * (18.5 / 20.0 - 1.0)))
    assert 0.515 <= gamma <= 0.525


def test_coupling_strength_clamps():
    assert dynamic_coupling_strength(100.0, DEFAULTS) == 0.1
    assert dynamic_coupling_strength(1.0, DEFAULTS) == 0.8


def test_coupling_strength_monotone_and_bounded():
    grid = np.arange(10.0, 50.0 + 0.25, 0.25)
    vals = np.array([dynamic_coupling_strength(v, DEFAULTS) for v in grid])
    assert np.all(np.diff(vals) <= 0)
    assert np.all((vals >= 0.1) & (vals <= 0.8))


def test_coupling_strength_rejects_bad_vix():
    with pytest.raises(ValueError):
        dynamic_coupling_strength(0.0, DEFAULTS)
    with pytest.raises(ValueError):
        dynamic_coupling_strength(-5.0, DEFAULTS)


def test_coupling_config_validation():
    with pytest.raises(ConfigError):
        CouplingConfig(
            gamma0=0.5, v0=20.0, gamma_min=0.9, gamma_max=0.8, tau=0.5, edge_scale=4.0
        )
    with pytest.raises(ConfigError):
        CouplingConfig(
            gamma0=0.5, v0=20.0, gamma_min=0.1, gamma_max=0.8, tau=1.0, edge_scale=4.0
        )


def test_correlation_matrix_small_cases():
    one = panel_from_matrix(np.array([[0.01], [-0.01], [0.02]]))
    assert correlation_matrix(one).tolist() == [[1.0]]

    base = np.array([0.01, -0.02, 0.015, 0.0])
    twin = panel_from_matrix(np.column_stack([base, base]))
    assert correlation_matrix(twin)[0, 1] == pytest.approx(1.0, abs=1e-12)

    anti = panel_from_matrix(np.column_stack([base, -base]))
    assert correlation_matrix(anti)[0, 1] == pytest.approx(-1.0, abs=1e-12)


def test_correlation_matrix_zero_variance_column():
    base = np.array([0.01, -0.02, 0.015, 0.0])
    panel = panel_from_matrix(np.column_stack([base, np.zeros(4)]))
    corr = correlation_matrix(panel)
    assert corr[0, 1] == 0.0 and corr[1, 0] == 0.0
    assert corr[1, 1] == 1.0


def test_correlation_matrix_needs_two_rows():
    with pytest.raises(InsufficientDataError):
        correlation_matrix(panel_from_matrix(np.array([[0.01, 0.02]])))


def test_correlation_matrix_well_formed():
    rng = np.random.default_rng(3)
    panel = panel_from_matrix(rng.normal(0, 0.01, (100, 6)))
    corr = correlation_matrix(panel)
    assert np.array_equal(corr, corr.T)
    assert np.allclose(np.diag(corr), 1.0)
    assert np.all((corr >= -1.0) & (corr <= 1.0))


def test_build_couplings_thresholding():
    corr = np.array([[1.0, 0.4], [0.4, 1.0]])
    graph = build_couplings(corr, 0.5, DEFAULTS)
    assert graph.n_edges == 0

    corr = np.array([[1.0, 0.8], [0.8, 1.0]])
    graph = build_couplings(corr, 0.5, DEFAULTS)
    assert graph.n_edges == 1
    assert (graph.row[0], graph.col[0]) == (0, 1)
    assert graph.weight[0] == pytest.approx(1.6, abs=1e-12)


def test_build_couplings_identity_gives_empty_graph():
    graph = build_couplings(np.eye(4), 0.5, DEFAULTS)
    assert graph.n_edges == 0


def test_build_couplings_keeps_negative_correlations():
    corr = np.array([[1.0, -0.7], [-0.7, 1.0]])
    graph = build_couplings(corr, 0.5, DEFAULTS)
    assert graph.n_edges == 1
    assert graph.weight[0] == pytest.approx(-1.4, abs=1e-12)


def test_build_couplings_strict_threshold():
    corr = np.array([[1.0, 0.5], [0.5, 1.0]])
    assert build_couplings(corr, 0.5, DEFAULTS).n_edges == 0


def test_edge_count_invariant_to_return_scaling():
    rng = np.random.default_rng(12)
    vals = rng.normal(0, 0.01, (150, 5))
    panel_a = panel_from_matrix(vals)
    panel_b = panel_from_matrix(vals * 3.0)
    corr_a = correlation_matrix(panel_a)
    corr_b = correlation_matrix(panel_b)
    g_a = build_couplings(corr_a, 0.5, DEFAULTS)
    g_b = build_couplings(corr_b, 0.5, DEFAULTS)
    assert g_a.n_edges == g_b.n_edges
