"""Reference selectors and the exhaustive minimum-energy oracle.

The three portfolio baselines (greedy correlation, robust mean/variance with
Ledoit-Wolf shrinkage, HRP-style clustering) consume a training ReturnsPanel
and emit an equal-weighted Selection, deterministic given the panel.  The
exhaustive oracle enumerates all C(n, K) states of an Ising model and is the
ground truth the sampler is tested against.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import squareform

from .errors import InfeasibleError, InsufficientDataError
from .factors import asset_index_stats, correlation_matrix
from .ising import IsingModel
from .marketdata import ReturnsPanel
from .selector import Selection, equal_weights

ORACLE_MAX_NODES = 25


@dataclass(frozen=True)
class ShrunkCovariance:
    """Convex blend of sample covariance and constant-correlation target."""

    matrix: np.ndarray
    shrinkage_intensity: float

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("covariance must be square")
        if not 0.0 <= self.shrinkage_intensity <= 1.0:
            raise ValueError("shrinkage intensity must lie in [0, 1]")
        if not np.allclose(m, m.T, atol=1e-12, rtol=0.0):
            raise ValueError("covariance must be symmetric")
        if m.size and float(np.linalg.eigvalsh(m).min()) < -1e-10:
            raise ValueError("covariance must be positive semi-definite")


def _check_k(k: int, n: int) -> None:
    if not (isinstance(k, (int, np.integer)) and k >= 1):
        raise ValueError(f"K must be a positive integer, got {k!r}")
    if k > n:
        raise InfeasibleError(f"cannot select K={k} assets from a universe of {n}")


def greedy_correlation_select(train: ReturnsPanel, k: int) -> Selection:
    """Top-K assets by Pearson correlation with the index, equal weights.

    Ties broken by ascending ticker.
    """
    tickers = train.tickers
    _check_k(k, len(tickers))
    r = train.values
    idx = train.index_values
    rho = np.array([asset_index_stats(r[:, i], idx)[0] for i in range(len(tickers))])
    order = sorted(range(len(tickers)), key=lambda i: (-rho[i], tickers[i]))
    chosen = tuple(tickers[i] for i in order[:k])
    return Selection(tickers=chosen, weights=equal_weights(k))


def ledoit_wolf_shrink(returns) -> ShrunkCovariance:
    """Constant-correlation Ledoit-Wolf shrinkage of the sample covariance.

    Sample covariance S uses the 1/T normalization; the target F keeps S's
    diagonal and replaces every off-diagonal with the average sample
    correlation; the intensity is the plug-in estimate clamped to [0, 1].
    When S already equals F (e.g. any 2-asset panel) the blend is S itself
    and the intensity is reported as 0.
    """
    if isinstance(returns, ReturnsPanel):
        x = returns.values
    else:
        x = np.asarray(returns, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("returns must be 2-d (rows = days, cols = assets)")
    t, n = x.shape
    if t < 2:
        raise InsufficientDataError("Ledoit-Wolf shrinkage needs at least 2 observations")

    x = x - x.mean(axis=0)
    s = (x.T @ x) / t
    sd = np.sqrt(np.diag(s))

    with np.errstate(divide="ignore", invalid="ignore"):
        corr = s / np.outer(sd, sd)
    corr = np.nan_to_num(corr, nan=0.0, posinf=0.0, neginf=0.0)
    if n > 1:
        rbar = (corr.sum() - np.trace(corr)) / (n * (n - 1))
    else:
        rbar = 0.0
    f = rbar * np.outer(sd, sd)
    np.fill_diagonal(f, np.diag(s))

    gamma = float(((f - s) ** 2).sum())
    if gamma <= 0.0:
        return ShrunkCovariance(matrix=s, shrinkage_intensity=0.0)

    # pi-hat: asymptotic variance of the sample covariance entries
    y = x**2
    pi_mat = (y.T @ y) / t - s**2
    pi_hat = float(pi_mat.sum())

    # rho-hat: diagonal part plus the constant-correlation cross terms
    theta_mat = ((x**3).T @ x) / t - sd[:, None] ** 2 * s
    np.fill_diagonal(theta_mat, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.outer(1.0 / sd, sd)
    ratio = np.nan_to_num(ratio, nan=0.0, posinf=0.0, neginf=0.0)
    rho_hat = float(np.trace(pi_mat)) + rbar * float((ratio * theta_mat).sum())

    kappa = (pi_hat - rho_hat) / gamma
    delta = max(0.0, min(1.0, kappa / t))
    shrunk = delta * f + (1.0 - delta) * s
    shrunk = 0.5 * (shrunk + shrunk.T)
    return ShrunkCovariance(matrix=shrunk, shrinkage_intensity=delta)


def robust_mvo_select(train: ReturnsPanel, k: int) -> Selection:
    """Top-K by mean return over shrunk volatility, equal weights.

    Assets with zero shrunk variance are excluded with a warning; ties in
    the score break by ascending ticker.
    """
    tickers = train.tickers
    _check_k(k, len(tickers))
    r = train.values
    cov = ledoit_wolf_shrink(train).matrix
    var = np.diag(cov)
    usable = var > 0.0
    if not usable.all():
        dropped = [t for t, u in zip(tickers, usable) if not u]
        warnings.warn(
            f"excluding zero-variance assets from robust MVO: {', '.join(dropped)}",
            UserWarning,
            stacklevel=2,
        )
    if int(usable.sum()) < k:
        raise InfeasibleError(
            f"only {int(usable.sum())} assets have positive variance; cannot pick K={k}"
        )
    mean = r.mean(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        score = mean / np.sqrt(var)
    cand = [i for i in range(len(tickers)) if usable[i]]
    cand.sort(key=lambda i: (-score[i], tickers[i]))
    chosen = tuple(tickers[i] for i in cand[:k])
    return Selection(tickers=chosen, weights=equal_weights(k))


def hrp_select(train: ReturnsPanel, k: int) -> Selection:
    """Cluster-based selection: cut a single-linkage tree at K clusters and
    take each cluster's minimum-variance asset, equal weights.

    Distances are d_ij = sqrt((1 - rho_ij)/2).  When tied merge heights make
    the K-cluster cut unattainable, the shortfall is filled with the
    lowest-variance unchosen assets, which also covers the degenerate
    all-uncorrelated case.
    """
    tickers = train.tickers
    n = len(tickers)
    _check_k(k, n)
    var = train.values.var(axis=0, ddof=1)

    if k == n:
        return Selection(tickers=tuple(tickers), weights=equal_weights(n))
    if n == 1:
        return Selection(tickers=tuple(tickers), weights=equal_weights(1))

    corr = correlation_matrix(train)
    dist = np.sqrt(np.maximum(0.0, (1.0 - corr) / 2.0))
    np.fill_diagonal(dist, 0.0)
    z = linkage(squareform(dist, checks=False), method="single")
    labels = fcluster(z, t=k, criterion="maxclust")

    chosen: list[str] = []
    for c in sorted(set(labels)):
        members = [i for i in range(n) if labels[i] == c]
        best = min(members, key=lambda i: (var[i], tickers[i]))
        chosen.append(tickers[best])
    if len(chosen) > k:
        # more clusters than requested cannot happen with maxclust, but keep
        # the lowest-variance representatives if it ever does
        chosen.sort(key=lambda tk: (var[tickers.index(tk)], tk))
        chosen = chosen[:k]
    if len(chosen) < k:
        rest = [t for t in tickers if t not in set(chosen)]
        rest.sort(key=lambda tk: (var[tickers.index(tk)], tk))
        chosen.extend(rest[: k - len(chosen)])
    return Selection(tickers=tuple(chosen), weights=equal_weights(k))


def exhaustive_oracle(model: IsingModel, k: int) -> tuple[np.ndarray, float]:
    """Minimum-energy state among all C(n, K) states with exactly K ones.

    Ties resolve to the lexicographically smallest index set, which is the
    first optimum encountered in combination order.  Guarded to n <= 25.
    """
    n = model.n
    if n > ORACLE_MAX_NODES:
        raise ValueError(
            f"exhaustive enumeration refused for n={n} > {ORACLE_MAX_NODES}"
        )
    _check_k(k, n)

    best_energy = np.inf
    best_combo = None
    chunk = 65536
    combos = itertools.combinations(range(n), k)
    while True:
        block = list(itertools.islice(combos, chunk))
        if not block:
            break
        idx = np.array(block, dtype=np.int64)          # [C, k]
        member = np.zeros((idx.shape[0], n), dtype=bool)
        member[np.arange(idx.shape[0])[:, None], idx] = True
        energies = -(member @ model.biases)
        if model.n_edges:
            both = member[:, model.edge_i] & member[:, model.edge_j]
            energies = energies + both @ model.edge_w
        pos = int(np.argmin(energies))                  # first minimum wins
        if energies[pos] < best_energy:
            best_energy = float(energies[pos])
            best_combo = idx[pos]
    state = np.zeros(n, dtype=np.int8)
    state[best_combo] = 1
    return state, best_energy
