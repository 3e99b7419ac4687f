"""Annealed multi-chain block Gibbs sampling.

Chains are independent: chain c draws from its own PCG64 stream spawned from
the root seed via SeedSequence, so results are bit-reproducible for a fixed
seed and independent of how chains are scheduled onto threads.  Samples are
pooled with equal weight across chains and temperatures; selection
frequencies are the pooled mean occupation of each spin.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigError
from .ising import BlockPartition, IsingModel, color_blocks, even_odd_blocks, local_field
from .kernels.pygibbs import stable_sigmoid

logger = logging.getLogger(__name__)

# log10(beta) endpoints of the default annealing ladder
LOG10_BETA_MIN = 0.3
LOG10_BETA_MAX = 1.8

BLOCKING_MODES = ("coloring", "even_odd")


@dataclass(frozen=True)
class SamplerConfig:
    """Chain/temperature schedule sizes and the root seed."""

    n_chains: int = 8
    n_temperatures: int = 13
    warmup_iters: int = 2500
    samples_per_temp: int = 1000
    steps_per_sample: int = 45
    seed: int = 12345
    blocking: str = "coloring"

    def __post_init__(self):
        for name in ("n_chains", "n_temperatures", "samples_per_temp", "steps_per_sample"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise ConfigError(f"{name} must be a positive integer, got {v!r}")
        if not isinstance(self.warmup_iters, (int, np.integer)) or self.warmup_iters < 0:
            raise ConfigError(f"warmup_iters must be a non-negative integer, got {self.warmup_iters!r}")
        if not isinstance(self.seed, (int, np.integer)) or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}")
        if self.blocking not in BLOCKING_MODES:
            raise ConfigError(
                f"blocking must be one of {BLOCKING_MODES}, got {self.blocking!r}"
            )


@dataclass(frozen=True)
class AnnealingSchedule:
    """Strictly increasing inverse temperatures visited in order."""

    betas: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.betas, dtype=np.float64)
        if b.ndim != 1 or b.size == 0:
            raise ConfigError("schedule needs at least one temperature")
        if not np.all(np.isfinite(b)) or np.any(b <= 0):
            raise ConfigError("inverse temperatures must be positive and finite")
        if np.any(np.diff(b) <= 0):
            raise ConfigError("inverse temperatures must be strictly increasing")
        object.__setattr__(self, "betas", b)

    @property
    def n_temperatures(self) -> int:
        return int(self.betas.size)


def build_annealing_schedule(
    n_temperatures: int = 13,
    log10_beta_min: float = LOG10_BETA_MIN,
    log10_beta_max: float = LOG10_BETA_MAX,
) -> AnnealingSchedule:
    """Geometric ladder: beta_k = 10 ** (min + k*(max-min)/(n-1)).

    Requires at least two rungs and a strictly widening exponent range;
    construct AnnealingSchedule directly for custom (e.g. single-beta)
    ladders.
    """
    if n_temperatures < 2:
        raise ConfigError("n_temperatures must be >= 2")
    if log10_beta_min >= log10_beta_max:
        raise ConfigError("log10_beta_min must be strictly below log10_beta_max")
    exps = np.linspace(log10_beta_min, log10_beta_max, n_temperatures)
    return AnnealingSchedule(10.0 ** exps)


@dataclass(frozen=True)
class SelectionFrequencies:
    """Pooled per-spin occupation frequencies plus per-temperature diagnostics.

    ``freq[i]`` is the fraction of all recorded samples (chains x
    temperatures x samples_per_temp, equally weighted) in which spin i was
    on.  ``rhat_max`` is a Gelman-Rubin-style shrink factor computed from
    per-chain occupation means pooled over temperatures; it is a rough
    stationarity heuristic (None when only one chain ran).
    """

    freq: np.ndarray
    n_samples_total: int
    betas: np.ndarray | None = None
    freq_per_beta: np.ndarray | None = None
    mean_energy_per_beta: np.ndarray | None = None
    rhat_max: float | None = None

    def __post_init__(self):
        f = np.asarray(self.freq, dtype=np.float64)
        if f.ndim != 1:
            raise ValueError("freq must be 1-d")
        if np.any(f < 0.0) or np.any(f > 1.0):
            raise ValueError("frequencies must lie in [0, 1]")
        if self.n_samples_total < 1:
            raise ValueError("n_samples_total must be positive")


def aggregate_frequencies(samples) -> SelectionFrequencies:
    """Per-spin mean of a set of recorded binary samples (rows = samples)."""
    s = np.asarray(samples, dtype=np.float64)
    if s.ndim != 2 or s.shape[0] == 0:
        raise ValueError("need at least one sample (2-d array, rows = samples)")
    if not np.all((s == 0.0) | (s == 1.0)):
        raise ValueError("samples must be binary")
    return SelectionFrequencies(
        freq=s.mean(axis=0), n_samples_total=int(s.shape[0])
    )


def conditional_prob(model: IsingModel, state, i: int, beta: float) -> float:
    """Heat-bath probability that spin i comes up 1 given all other spins.

    Equal to sigmoid(beta * phi_i) with phi_i the local field; satisfies
    detailed balance for the Boltzmann distribution at inverse temperature
    beta because phi_i is exactly the energy drop from setting the spin.
    """
    if beta < 0:
        raise ValueError("beta must be non-negative")
    phi = local_field(model, state, i)
    return float(stable_sigmoid(np.array(beta * phi)))


def partition_for(model: IsingModel, config: SamplerConfig) -> BlockPartition:
    """Build the block partition selected by ``config.blocking``."""
    if config.blocking == "coloring":
        return color_blocks(model)
    return even_odd_blocks(model)


def gibbs_sweep(model: IsingModel, state, partition: BlockPartition, beta: float, rng) -> np.ndarray:
    """One full sweep over all blocks; returns the new state, input untouched.

    Within each block, fields are computed from the pre-block state and all
    block spins are resampled synchronously; this equals sequential
    single-site Gibbs when blocks are independent sets.  Consumes exactly
    one uniform per spin from ``rng``.
    """
    if beta < 0:
        raise ValueError("beta must be non-negative")
    partition.validate_cover(model.n)
    from .kernels import pygibbs

    s = np.asarray(state, dtype=np.float64).copy()
    if s.size != model.n:
        raise ValueError(f"state has length {s.size}, model has {model.n} spins")
    mats = pygibbs._block_views(
        model.adj_indptr, model.adj_indices, model.adj_weights, model.n, partition.blocks
    )
    pygibbs.sweep_inplace(s, model.biases, partition.blocks, mats, beta, rng)
    return s


def _flatten_blocks(partition: BlockPartition):
    offsets = np.zeros(partition.n_blocks + 1, dtype=np.int64)
    np.cumsum([b.size for b in partition.blocks], out=offsets[1:])
    nodes = np.concatenate(partition.blocks).astype(np.int64)
    return offsets, nodes


def _run_all_chains(model, schedule, config, partition, backend, record_states):
    """Run all chains, serially or on a thread pool; fixed chain order."""
    if partition is None:
        partition = partition_for(model, config)
    else:
        partition.validate_cover(model.n)
    backend = kernels.resolve_backend(backend)
    runner = kernels.chain_runner(backend)
    offsets, nodes = _flatten_blocks(partition)

    seeds = np.random.SeedSequence(config.seed).spawn(config.n_chains)
    bitgens = [np.random.PCG64(s) for s in seeds]

    def one(c):
        return runner(
            model.adj_indptr, model.adj_indices, model.adj_weights, model.biases,
            offsets, nodes, schedule.betas,
            config.warmup_iters, config.samples_per_temp, config.steps_per_sample,
            bitgens[c], record_states,
            model.edge_i, model.edge_j, model.edge_w,
        )

    n_workers = min(config.n_chains, os.cpu_count() or 1)
    if backend == "compiled" and config.n_chains > 1 and n_workers > 1:
        # the compiled kernel drops the GIL, so chains run in true parallel
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(one, range(config.n_chains)))
    else:
        results = [one(c) for c in range(config.n_chains)]
    return results


def _rhat_max(chain_freqs: np.ndarray, m_per_chain: int) -> float | None:
    """Gelman-Rubin-style max shrink factor over spins from per-chain means."""
    c = chain_freqs.shape[0]
    if c < 2 or m_per_chain < 2:
        return None
    m = float(m_per_chain)
    within = np.mean(chain_freqs * (1.0 - chain_freqs) * (m / (m - 1.0)), axis=0)
    between = m * np.var(chain_freqs, axis=0, ddof=1)
    vhat = (m - 1.0) / m * within + between / m
    with np.errstate(divide="ignore", invalid="ignore"):
        rhat = np.sqrt(vhat / within)
    rhat = np.where(within > 0.0, rhat, np.where(between > 0.0, np.inf, 1.0))
    return float(np.max(rhat)) if rhat.size else None


RHAT_WARN_THRESHOLD = 1.1


def run_chains(
    model: IsingModel,
    schedule: AnnealingSchedule,
    config: SamplerConfig,
    *,
    partition: BlockPartition | None = None,
    backend: str | None = None,
) -> SelectionFrequencies:
    """Run the full annealed ensemble and pool selection frequencies.

    Every chain anneals through the whole schedule, carrying its state from
    one temperature to the next.  All recorded samples are pooled with equal
    weight, so the frequency equals the grand mean over chains and
    temperatures.
    """
    results = _run_all_chains(model, schedule, config, partition, backend, False)
    sums = np.stack([r[0] for r in results])     # [C, T, n]
    esums = np.stack([r[1] for r in results])    # [C, T]
    c, t = config.n_chains, schedule.n_temperatures
    spt = config.samples_per_temp
    per_temp_count = c * spt
    total = per_temp_count * t

    freq_per_beta = sums.sum(axis=0) / per_temp_count
    freq = sums.sum(axis=(0, 1)) / total
    mean_energy = esums.sum(axis=0) / per_temp_count

    chain_freqs = sums.sum(axis=1) / (t * spt)   # [C, n]
    rhat = _rhat_max(chain_freqs, t * spt)
    if rhat is not None and rhat > RHAT_WARN_THRESHOLD:
        logger.warning(
            "max split-chain rhat %.3f exceeds %.2f; chains may not have mixed",
            rhat, RHAT_WARN_THRESHOLD,
        )

    return SelectionFrequencies(
        freq=freq,
        n_samples_total=int(total),
        betas=schedule.betas.copy(),
        freq_per_beta=freq_per_beta,
        mean_energy_per_beta=mean_energy,
        rhat_max=rhat,
    )


def sample_states(
    model: IsingModel,
    schedule: AnnealingSchedule,
    config: SamplerConfig,
    *,
    partition: BlockPartition | None = None,
    backend: str | None = None,
) -> np.ndarray:
    """Record raw sampled states as uint64 bit masks (requires n <= 64).

    Returns an array of shape (n_chains, n_temperatures, samples_per_temp);
    bit i of each mask is the value of spin i.
    """
    if model.n > 64:
        raise ValueError("state recording requires n <= 64")
    results = _run_all_chains(model, schedule, config, partition, backend, True)
    return np.stack([r[2] for r in results])


def unpack_states(masks: np.ndarray, n: int) -> np.ndarray:
    """Expand uint64 bit masks to a {0,1} int8 array with trailing axis n."""
    masks = np.asarray(masks, dtype=np.uint64)
    bits = (masks[..., None] >> np.arange(n, dtype=np.uint64)) & np.uint64(1)
    return bits.astype(np.int8)
