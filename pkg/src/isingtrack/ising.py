"""Ising model on {0,1} spins with pairwise couplings.

Energy convention:

    E(s) = - sum_i m_i * s_i + sum_{i<j} J_ij * s_i * s_j

where s_i in {0, 1}, m_i is the per-spin bias (reward for switching a spin
on) and J_ij > 0 is an antiferromagnetic coupling that penalises switching
both endpoints on together.  Flipping spin i changes the energy by

    E(s_i=1) - E(s_i=0) = -(m_i - sum_{j~i} J_ij s_j) = -local_field(i)

so the local field is exactly the energy drop from setting the spin.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class IsingModel:
    """Immutable model: biases plus an undirected weighted edge list.

    Edges are stored canonically (i < j, sorted, no duplicates, no self
    loops) together with a CSR view of the symmetric adjacency used by the
    samplers.  Build instances through :meth:`from_edges`.
    """

    n: int
    biases: np.ndarray          # float64 [n]
    edge_i: np.ndarray          # int64 [m], tail of each edge, edge_i < edge_j
    edge_j: np.ndarray          # int64 [m]
    edge_w: np.ndarray          # float64 [m]
    adj_indptr: np.ndarray = field(repr=False)   # int64 [n+1]
    adj_indices: np.ndarray = field(repr=False)  # int64 [nnz], column-sorted per row
    adj_weights: np.ndarray = field(repr=False)  # float64 [nnz]

    @classmethod
    def from_edges(cls, biases, edges) -> "IsingModel":
        """Build a model from per-spin biases and (i, j, weight) triples.

        Raises ValueError on self-loops, duplicate pairs (in either
        orientation), out-of-range indices, or non-finite inputs.
        """
        b = np.ascontiguousarray(np.asarray(biases, dtype=np.float64))
        if b.ndim != 1 or b.size == 0:
            raise ValueError("biases must be a non-empty 1-d array")
        if not np.all(np.isfinite(b)):
            raise ValueError("biases must be finite")
        n = int(b.size)

        triples = list(edges)
        if triples:
            ei = np.array([t[0] for t in triples], dtype=np.int64)
            ej = np.array([t[1] for t in triples], dtype=np.int64)
            ew = np.array([t[2] for t in triples], dtype=np.float64)
        else:
            ei = np.empty(0, dtype=np.int64)
            ej = np.empty(0, dtype=np.int64)
            ew = np.empty(0, dtype=np.float64)

        if ei.size:
            if not np.all(np.isfinite(ew)):
                raise ValueError("edge weights must be finite")
            if np.any(ei < 0) or np.any(ei >= n) or np.any(ej < 0) or np.any(ej >= n):
                raise ValueError("edge endpoint out of range")
            if np.any(ei == ej):
                bad = int(ei[ei == ej][0])
                raise ValueError(f"self-loop on spin {bad} is not allowed")
            # canonical orientation i < j
            swap = ei > ej
            ei2 = np.where(swap, ej, ei)
            ej2 = np.where(swap, ei, ej)
            order = np.lexsort((ej2, ei2))
            ei, ej, ew = ei2[order], ej2[order], ew[order]
            dup = (ei[1:] == ei[:-1]) & (ej[1:] == ej[:-1])
            if np.any(dup):
                k = int(np.flatnonzero(dup)[0])
                raise ValueError(f"duplicate edge ({ei[k]}, {ej[k]})")

        indptr, indices, weights = _symmetric_csr(n, ei, ej, ew)
        return cls(
            n=n, biases=b,
            edge_i=ei, edge_j=ej, edge_w=ew,
            adj_indptr=indptr, adj_indices=indices, adj_weights=weights,
        )

    @property
    def n_edges(self) -> int:
        return int(self.edge_i.size)

    def neighbors(self, i: int) -> np.ndarray:
        lo, hi = self.adj_indptr[i], self.adj_indptr[i + 1]
        return self.adj_indices[lo:hi]

    def degrees(self) -> np.ndarray:
        return np.diff(self.adj_indptr)


def _symmetric_csr(n, edge_i, edge_j, edge_w):
    """Symmetric CSR adjacency from canonical edges, columns sorted per row."""
    rows = np.concatenate([edge_i, edge_j])
    cols = np.concatenate([edge_j, edge_i])
    vals = np.concatenate([edge_w, edge_w])
    order = np.lexsort((cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    counts = np.bincount(rows, minlength=n).astype(np.int64)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, np.ascontiguousarray(cols), np.ascontiguousarray(vals)


def _check_state(model: IsingModel, state) -> np.ndarray:
    s = np.asarray(state, dtype=np.float64)
    if s.ndim != 1 or s.size != model.n:
        raise ValueError(
            f"state has length {s.size}, model has {model.n} spins"
        )
    if not np.all((s == 0.0) | (s == 1.0)):
        raise ValueError("state entries must be 0 or 1")
    return s


def energy(model: IsingModel, state) -> float:
    """Total energy of a {0,1} configuration.

    A state of all zeros has energy 0 by construction.
    """
    s = _check_state(model, state)
    e = -float(np.dot(model.biases, s))
    if model.n_edges:
        e += float(np.dot(model.edge_w, s[model.edge_i] * s[model.edge_j]))
    return e


def local_field(model: IsingModel, state, i: int) -> float:
    """phi_i = m_i - sum_{j~i} J_ij s_j, the energy drop from setting spin i.

    Depends only on neighbours of i, so s_i itself is ignored.
    """
    s = _check_state(model, state)
    if not 0 <= i < model.n:
        raise ValueError(f"spin index {i} out of range for n={model.n}")
    lo, hi = model.adj_indptr[i], model.adj_indptr[i + 1]
    acc = 0.0
    for k in range(lo, hi):
        acc += model.adj_weights[k] * s[model.adj_indices[k]]
    return float(model.biases[i]) - acc


def energy_gap(model: IsingModel, state, i: int) -> float:
    """E(s_i=1) - E(s_i=0) with all other spins held fixed; equals -local_field."""
    return -local_field(model, state, i)


@dataclass(frozen=True)
class BlockPartition:
    """Ordered list of spin blocks updated together during one sweep.

    Blocks must be disjoint and cover every spin exactly once.  When each
    block is an independent set of the coupling graph, synchronous updates
    within a block coincide with sequential single-site Gibbs updates.
    """

    blocks: tuple

    def __post_init__(self):
        for b in self.blocks:
            if not isinstance(b, np.ndarray) or b.dtype != np.int64:
                raise ValueError("each block must be an int64 ndarray")
            if b.size == 0:
                raise ValueError("empty blocks are not allowed")

    @classmethod
    def from_lists(cls, blocks) -> "BlockPartition":
        return cls(tuple(np.asarray(b, dtype=np.int64) for b in blocks))

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    def n_spins(self) -> int:
        return sum(b.size for b in self.blocks)

    def validate_cover(self, n: int) -> None:
        seen = np.concatenate(self.blocks) if self.blocks else np.empty(0, np.int64)
        if seen.size != n or not np.array_equal(np.sort(seen), np.arange(n)):
            raise ValueError("blocks must partition {0..n-1} exactly")

    def is_independent(self, model: IsingModel) -> bool:
        """True when no edge of the model lies inside a single block."""
        block_of = np.empty(model.n, dtype=np.int64)
        for k, b in enumerate(self.blocks):
            block_of[b] = k
        if model.n_edges == 0:
            return True
        return bool(np.all(block_of[model.edge_i] != block_of[model.edge_j]))


def color_blocks(model: IsingModel) -> BlockPartition:
    """Greedy graph colouring of the coupling graph into independent blocks.

    Deterministic: vertices are visited in descending degree (ties broken by
    ascending index) and each takes the smallest colour unused among its
    already-coloured neighbours.  An edgeless model yields a single block.
    """
    n = model.n
    deg = model.degrees()
    order = sorted(range(n), key=lambda v: (-int(deg[v]), v))
    colors = np.full(n, -1, dtype=np.int64)
    for v in order:
        lo, hi = model.adj_indptr[v], model.adj_indptr[v + 1]
        used = {int(colors[u]) for u in model.adj_indices[lo:hi] if colors[u] >= 0}
        c = 0
        while c in used:
            c += 1
        colors[v] = c
    n_colors = int(colors.max()) + 1 if n else 0
    blocks = [np.flatnonzero(colors == c).astype(np.int64) for c in range(n_colors)]
    part = BlockPartition(tuple(blocks))
    part.validate_cover(n)
    return part


def even_odd_blocks(model: IsingModel) -> BlockPartition:
    """Two-block split into even and odd spin indices.

    Not independent for general graphs; within-block updates are then
    synchronous rather than exact Gibbs.  Kept as a configurable alternative
    to colouring.
    """
    even = np.arange(0, model.n, 2, dtype=np.int64)
    odd = np.arange(1, model.n, 2, dtype=np.int64)
    blocks = [b for b in (even, odd) if b.size]
    part = BlockPartition(tuple(blocks))
    part.validate_cover(model.n)
    return part
