"""Kernel backend selection.

Two interchangeable chain runners exist: a compiled Cython kernel
(``_gibbs``) and a pure-Python/scipy one (``pygibbs``).  The compiled one is
preferred when its extension module imported successfully.  Set the
environment variable ``ISINGTRACK_KERNEL`` to ``python`` or ``compiled`` to
force a choice; forcing ``compiled`` when the extension is unavailable is an
error.
"""

from __future__ import annotations

import os

from . import pygibbs

try:
    from . import _gibbs
except ImportError:
    _gibbs = None

_ENV_VAR = "ISINGTRACK_KERNEL"
BACKENDS = ("compiled", "python")


def compiled_available() -> bool:
    return _gibbs is not None


def active_backend() -> str:
    """Backend used when no explicit choice is made."""
    forced = os.environ.get(_ENV_VAR, "").strip().lower()
    if forced:
        return resolve_backend(forced)
    return "compiled" if compiled_available() else "python"


def resolve_backend(name: str | None) -> str:
    """Validate a backend name; None means the active default."""
    if name is None:
        return active_backend()
    name = name.strip().lower()
    if name not in BACKENDS:
        raise ValueError(f"unknown kernel backend {name!r}; choose from {BACKENDS}")
    if name == "compiled" and not compiled_available():
        raise ValueError("compiled kernel requested but the extension is not built")
    return name


def chain_runner(backend: str | None = None):
    """Return the run_chain callable for the given backend."""
    name = resolve_backend(backend)
    if name == "compiled":
        return _gibbs.run_chain
    return _py_run_chain


def _py_run_chain(
    indptr, indices, weights, biases,
    block_offsets, block_nodes, betas,
    warmup_iters, samples_per_temp, steps_per_sample,
    bit_generator, record_states,
    edge_i, edge_j, edge_w,
):
    """Adapter giving pygibbs the same flattened-block signature as _gibbs."""
    import numpy as np

    blocks = [
        block_nodes[block_offsets[k]:block_offsets[k + 1]]
        for k in range(len(block_offsets) - 1)
    ]
    if record_states and biases.shape[0] > 64:
        raise ValueError("state recording requires n <= 64")
    rng = np.random.Generator(bit_generator)
    return pygibbs.run_chain(
        indptr, indices, weights, biases, blocks, betas,
        warmup_iters, samples_per_temp, steps_per_sample,
        rng, record_states, edge_i, edge_j, edge_w,
    )
