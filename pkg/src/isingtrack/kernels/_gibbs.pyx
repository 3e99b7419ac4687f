# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled annealed block-Gibbs chain runner.

Mirrors kernels.pygibbs.run_chain: same update rule, same per-chain random
stream consumption (one uniform per spin at init, one per spin per sweep in
block order), so a fixed seed gives the same sample stream up to floating
point in exp().  The hot loop runs without the GIL, so chains can execute on
a thread pool in true parallel.
"""

import numpy as np

cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.math cimport exp, fabs
from numpy.random cimport bitgen_t

cnp.import_array()

cdef const char *_CAPSULE_NAME = "BitGenerator"


cdef inline double _sigmoid(double x) nogil:
    # exact logistic, overflow-free for any finite x
    cdef double t = exp(-fabs(x))
    if x >= 0.0:
        return 1.0 / (1.0 + t)
    return t / (1.0 + t)


cdef void _sweep(
    double *state, double *field,
    const double *biases,
    const cnp.int64_t *indptr, const cnp.int64_t *indices, const double *weights,
    const cnp.int64_t *block_offsets, const cnp.int64_t *block_nodes,
    Py_ssize_t n_blocks, double beta, bitgen_t *bg,
) nogil:
    cdef Py_ssize_t b, k, p, v, lo, hi
    cdef double acc, u
    for b in range(n_blocks):
        lo = block_offsets[b]
        hi = block_offsets[b + 1]
        # fields from the pre-block state, then synchronous block update
        for k in range(lo, hi):
            v = block_nodes[k]
            acc = 0.0
            for p in range(indptr[v], indptr[v + 1]):
                acc += weights[p] * state[indices[p]]
            field[k] = biases[v] - acc
        for k in range(lo, hi):
            u = bg.next_double(bg.state)
            state[block_nodes[k]] = 1.0 if u < _sigmoid(beta * field[k]) else 0.0


cdef inline double _energy(
    const double[::1] biases, const double[::1] state,
    const cnp.int64_t[::1] edge_i, const cnp.int64_t[::1] edge_j,
    const double[::1] edge_w,
) nogil:
    cdef Py_ssize_t i, k
    cdef double e = 0.0
    for i in range(biases.shape[0]):
        e -= biases[i] * state[i]
    for k in range(edge_w.shape[0]):
        e += edge_w[k] * state[edge_i[k]] * state[edge_j[k]]
    return e


def run_chain(
    indptr_o, indices_o, weights_o, biases_o,
    block_offsets_o, block_nodes_o, betas_o,
    Py_ssize_t warmup_iters, Py_ssize_t samples_per_temp,
    Py_ssize_t steps_per_sample,
    bit_generator, bint record_states,
    edge_i_o, edge_j_o, edge_w_o,
):
    """Run one annealed chain; same contract as pygibbs.run_chain.

    ``bit_generator`` is a numpy BitGenerator owned exclusively by this
    chain; its lock is held for the duration of the run.
    """
    cdef cnp.int64_t[::1] indptr = np.ascontiguousarray(indptr_o, dtype=np.int64)
    cdef cnp.int64_t[::1] indices = np.ascontiguousarray(indices_o, dtype=np.int64)
    cdef double[::1] weights = np.ascontiguousarray(weights_o, dtype=np.float64)
    cdef double[::1] biases = np.ascontiguousarray(biases_o, dtype=np.float64)
    cdef cnp.int64_t[::1] block_offsets = np.ascontiguousarray(block_offsets_o, dtype=np.int64)
    cdef cnp.int64_t[::1] block_nodes = np.ascontiguousarray(block_nodes_o, dtype=np.int64)
    cdef double[::1] betas = np.ascontiguousarray(betas_o, dtype=np.float64)
    cdef cnp.int64_t[::1] edge_i = np.ascontiguousarray(edge_i_o, dtype=np.int64)
    cdef cnp.int64_t[::1] edge_j = np.ascontiguousarray(edge_j_o, dtype=np.int64)
    cdef double[::1] edge_w = np.ascontiguousarray(edge_w_o, dtype=np.float64)

    cdef Py_ssize_t n = biases.shape[0]
    cdef Py_ssize_t n_temps = betas.shape[0]
    cdef Py_ssize_t n_blocks = block_offsets.shape[0] - 1

    if record_states and n > 64:
        raise ValueError("state recording requires n <= 64")

    capsule = bit_generator.capsule
    if not PyCapsule_IsValid(capsule, _CAPSULE_NAME):
        raise ValueError("expected a numpy BitGenerator capsule")
    cdef bitgen_t *bg = <bitgen_t *> PyCapsule_GetPointer(capsule, _CAPSULE_NAME)

    spin_sums_arr = np.zeros((n_temps, n), dtype=np.float64)
    energy_sums_arr = np.zeros(n_temps, dtype=np.float64)
    states_arr = (
        np.zeros((n_temps, samples_per_temp), dtype=np.uint64)
        if record_states else None
    )
    state_arr = np.zeros(n, dtype=np.float64)
    field_arr = np.empty(n, dtype=np.float64)

    cdef double[:, ::1] spin_sums = spin_sums_arr
    cdef double[::1] energy_sums = energy_sums_arr
    cdef cnp.uint64_t[:, ::1] states_mv
    if record_states:
        states_mv = states_arr
    cdef double[::1] state = state_arr
    cdef double[::1] field = field_arr

    cdef Py_ssize_t t, k, it, i
    cdef double beta
    cdef cnp.uint64_t mask

    with bit_generator.lock:
        with nogil:
            for i in range(n):
                state[i] = 1.0 if bg.next_double(bg.state) < 0.5 else 0.0
            for t in range(n_temps):
                beta = betas[t]
                for it in range(warmup_iters):
                    _sweep(&state[0], &field[0], &biases[0],
                           &indptr[0], &indices[0], &weights[0],
                           &block_offsets[0], &block_nodes[0],
                           n_blocks, beta, bg)
                for k in range(samples_per_temp):
                    for it in range(steps_per_sample):
                        _sweep(&state[0], &field[0], &biases[0],
                               &indptr[0], &indices[0], &weights[0],
                               &block_offsets[0], &block_nodes[0],
                               n_blocks, beta, bg)
                    for i in range(n):
                        spin_sums[t, i] += state[i]
                    energy_sums[t] += _energy(biases, state, edge_i, edge_j, edge_w)
                    if record_states:
                        mask = 0
                        for i in range(n):
                            if state[i] > 0.5:
                                mask |= (<cnp.uint64_t>1) << i
                        states_mv[t, k] = mask

    return spin_sums_arr, energy_sums_arr, states_arr, state_arr
