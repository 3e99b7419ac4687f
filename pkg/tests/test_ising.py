import numpy as np
import pytest

from isingtrack.ising import (
    BlockPartition,
    IsingModel,
    color_blocks,
    energy,
    energy_gap,
    even_odd_blocks,
    local_field,
)
from oracles import naive_energy


def random_model(rng, n=None, p_edge=0.4, bias_lo=-2.0, bias_hi=3.0):
    n = n or int(rng.integers(2, 11))
    biases = rng.uniform(bias_lo, bias_hi, n)
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p_edge:
                edges.append((i, j, float(rng.uniform(-2.0, 2.0))))
    return IsingModel.from_edges(biases, edges), edges


def test_energy_of_empty_selection_is_zero():
    model = IsingModel.from_edges([1.0, 2.0], [(0, 1, 3.0)])
    assert energy(model, [0, 0]) == 0.0


def test_energy_single_active_node():
    model = IsingModel.from_edges([2.0], [])
    assert energy(model, [1]) == -2.0


def test_energy_two_nodes_with_coupling():
    model = IsingModel.from_edges([1.0, 1.0], [(0, 1, 3.0)])
    assert energy(model, [1, 1]) == pytest.approx(1.0, abs=1e-15)


def test_energy_matches_naive_reference():
    rng = np.random.default_rng(7)
    for _ in range(60):
        model, edges = random_model(rng)
        state = rng.integers(0, 2, model.n)
        expected = naive_energy(model.biases, edges, state)
        assert energy(model, state) == pytest.approx(expected, abs=1e-12)


def test_energy_invariant_under_edge_order():
    biases = [0.5, -1.0, 2.0, 0.0]
    edges = [(0, 1, 1.5), (1, 2, -0.5), (0, 3, 2.0)]
    m1 = IsingModel.from_edges(biases, edges)
    m2 = IsingModel.from_edges(biases, edges[::-1])
    state = [1, 1, 0, 1]
    assert energy(m1, state) == energy(m2, state)


def test_local_field_isolated_node():
    model = IsingModel.from_edges([2.0], [])
    assert local_field(model, [0], 0) == 2.0


def test_local_field_one_active_neighbor():
    model = IsingModel.from_edges([1.0, 0.0], [(0, 1, 3.0)])
    assert local_field(model, [0, 1], 0) == -2.0


def test_local_field_inactive_neighbors():
    model = IsingModel.from_edges([1.5, 0.0, 0.0], [(0, 1, 3.0), (0, 2, -1.0)])
    assert local_field(model, [0, 0, 0], 0) == 1.5


def test_flip_gap_equals_negative_local_field():
    # E(s_i=1) - E(s_i=0) == -local_field for every node and random state
    rng = np.random.default_rng(21)
    for _ in range(40):
        model, _ = random_model(rng)
        state = rng.integers(0, 2, model.n)
        for i in range(model.n):
            hi = state.copy()
            lo = state.copy()
            hi[i] = 1
            lo[i] = 0
            gap = energy(model, hi) - energy(model, lo)
            assert gap == pytest.approx(-local_field(model, state, i), abs=1e-12)
            assert energy_gap(model, state, i) == pytest.approx(gap, abs=1e-12)


def test_state_length_mismatch_rejected():
    model = IsingModel.from_edges([1.0, 1.0], [])
    with pytest.raises(ValueError):
        energy(model, [1])


def test_from_edges_rejects_self_loop():
    with pytest.raises(ValueError):
        IsingModel.from_edges([1.0, 1.0], [(0, 0, 1.0)])


def test_from_edges_rejects_duplicate_edges():
    with pytest.raises(ValueError):
        IsingModel.from_edges([1.0, 1.0], [(0, 1, 1.0), (1, 0, 2.0)])


def test_from_edges_rejects_out_of_range_index():
    with pytest.raises(ValueError):
        IsingModel.from_edges([1.0, 1.0], [(0, 2, 1.0)])


def test_from_edges_rejects_non_finite():
    with pytest.raises(ValueError):
        IsingModel.from_edges([np.nan, 1.0], [])
    with pytest.raises(ValueError):
        IsingModel.from_edges([1.0, 1.0], [(0, 1, np.inf)])


def test_color_blocks_edgeless_single_block():
    model = IsingModel.from_edges([0.0] * 5, [])
    part = color_blocks(model)
    assert part.n_blocks == 1
    assert sorted(part.blocks[0].tolist()) == [0, 1, 2, 3, 4]


def test_color_blocks_single_edge():
    model = IsingModel.from_edges([0.0] * 4, [(0, 1, 1.0)])
    part = color_blocks(model)
    assert part.n_blocks == 2
    assert sorted(part.blocks[0].tolist()) == [0, 2, 3]
    assert part.blocks[1].tolist() == [1]


def test_color_blocks_triangle_three_singletons():
    model = IsingModel.from_edges(
        [0.0] * 3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]
    )
    part = color_blocks(model)
    assert part.n_blocks == 3
    assert all(b.size == 1 for b in part.blocks)


def test_color_blocks_always_independent_sets():
    rng = np.random.default_rng(99)
    for _ in range(30):
        model, _ = random_model(rng, n=int(rng.integers(2, 16)), p_edge=0.5)
        part = color_blocks(model)
        part.validate_cover(model.n)
        assert part.is_independent(model)
        if model.n_edges:
            assert part.n_blocks >= 2


def test_even_odd_blocks_cover_but_may_conflict():
    model = IsingModel.from_edges([0.0] * 5, [(0, 2, 1.0)])
    part = even_odd_blocks(model)
    part.validate_cover(model.n)
    assert part.n_blocks == 2
    assert part.blocks[0].tolist() == [0, 2, 4]
    # even/odd split is not an independent set for this edge
    assert not part.is_independent(model)


def test_block_partition_validation():
    with pytest.raises(ValueError):
        BlockPartition.from_lists([[0, 1], [1]]).validate_cover(2)
    with pytest.raises(ValueError):
        BlockPartition.from_lists([[0]]).validate_cover(2)
