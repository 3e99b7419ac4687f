"""Pure-Python annealed block-Gibbs chain runner.

This is the fallback backend; the compiled Cython kernel implements the same
contract.  Both consume the chain's random stream identically: one uniform
per spin for the random initial state, then one uniform per spin per sweep,
in block order.  Within one backend results are bit-reproducible for a fixed
seed regardless of thread count.

The conditional update is heat-bath Gibbs: spin i switches on with
probability sigmoid(beta * phi_i) where phi_i is the local field, i.e. the
energy drop from setting the spin.  Fields for a whole block are computed
from the pre-block state, then every spin of the block is resampled; on
independent-set blocks this equals sequential single-site Gibbs.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse


def stable_sigmoid(x: np.ndarray) -> np.ndarray:
    """Overflow-free logistic function, exact down to the subnormal range."""
    x = np.asarray(x, dtype=np.float64)
    t = np.exp(-np.abs(x))
    return np.where(x >= 0.0, 1.0 / (1.0 + t), t / (1.0 + t))


def _block_views(indptr, indices, weights, n, blocks):
    """Per-block CSR row slices of the symmetric adjacency."""
    full = sparse.csr_matrix(
        (weights, indices, indptr), shape=(n, n), dtype=np.float64
    )
    return [full[b] for b in blocks]


def sweep_inplace(state, biases, block_nodes, block_mats, beta, rng):
    """One full sweep over all blocks, updating ``state`` in place."""
    for nodes, mat in zip(block_nodes, block_mats):
        phi = biases[nodes] - mat.dot(state)
        p = stable_sigmoid(beta * phi)
        u = rng.random(nodes.size)
        state[nodes] = (u < p).astype(np.float64)


def _energy(biases, edge_i, edge_j, edge_w, state):
    e = -np.dot(biases, state)
    if edge_w.size:
        e += np.dot(edge_w, state[edge_i] * state[edge_j])
    return float(e)


def _pack_bits(state) -> np.uint64:
    mask = 0
    for b in np.flatnonzero(state > 0.5):
        mask |= 1 << int(b)
    return np.uint64(mask)


def run_chain(
    indptr,
    indices,
    weights,
    biases,
    blocks,
    betas,
    warmup_iters,
    samples_per_temp,
    steps_per_sample,
    rng,
    record_states,
    edge_i,
    edge_j,
    edge_w,
):
    """Run one annealed chain; returns per-temperature tallies.

    The state carries over from each temperature to the next.  At every
    temperature the chain performs ``warmup_iters`` sweeps, then records
    ``samples_per_temp`` samples spaced ``steps_per_sample`` sweeps apart
    (the first sample lands after warmup + steps_per_sample sweeps).

    Returns (spin_sums[n_temps, n], energy_sums[n_temps],
    states[n_temps, samples_per_temp] or None, final_state[n]).
    """
    n = biases.shape[0]
    n_temps = len(betas)
    block_mats = _block_views(indptr, indices, weights, n, blocks)

    spin_sums = np.zeros((n_temps, n), dtype=np.float64)
    energy_sums = np.zeros(n_temps, dtype=np.float64)
    states_out = (
        np.zeros((n_temps, samples_per_temp), dtype=np.uint64)
        if record_states
        else None
    )

    state = (rng.random(n) < 0.5).astype(np.float64)
    for t, beta in enumerate(betas):
        for _ in range(warmup_iters):
            sweep_inplace(state, biases, blocks, block_mats, beta, rng)
        for k in range(samples_per_temp):
            for _ in range(steps_per_sample):
                sweep_inplace(state, biases, blocks, block_mats, beta, rng)
            spin_sums[t] += state
            energy_sums[t] += _energy(biases, edge_i, edge_j, edge_w, state)
            if states_out is not None:
                states_out[t, k] = _pack_bits(state)
    return spin_sums, energy_sums, states_out, state
