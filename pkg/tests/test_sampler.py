import numpy as np
import pytest

from isingtrack.errors import ConfigError
from isingtrack.ising import IsingModel, color_blocks
from isingtrack.kernels import compiled_available
from isingtrack.sampler import (
    AnnealingSchedule,
    SamplerConfig,
    SelectionFrequencies,
    aggregate_frequencies,
    build_annealing_schedule,
    conditional_prob,
    gibbs_sweep,
    run_chains,
    sample_states,
    unpack_states,
)
from oracles import boltzmann_distribution, tv_distance


def small_config(**kw):
    base = dict(
        n_chains=4,
        n_temperatures=3,
        warmup_iters=50,
        samples_per_temp=200,
        steps_per_sample=2,
        seed=4242,
    )
    base.update(kw)
    return SamplerConfig(**base)


def test_schedule_endpoints():
    sched = build_annealing_schedule(2)
    assert sched.betas[0] == pytest.approx(10**0.3)
    assert sched.betas[-1] == pytest.approx(10**1.8)


def test_schedule_twelve_temp_spacing():
    sched = build_annealing_schedule(12)
    assert sched.n_temperatures == 12
    assert sched.betas[1] == pytest.approx(10 ** (0.3 + 1.5 / 11))


def test_schedule_rejects_degenerate():
    with pytest.raises(ConfigError):
        build_annealing_schedule(1)
    with pytest.raises(ConfigError):
        build_annealing_schedule(4, log10_beta_min=0.5, log10_beta_max=0.5)
    with pytest.raises(ConfigError):
        build_annealing_schedule(4, log10_beta_min=1.0, log10_beta_max=0.5)
    with pytest.raises(ConfigError):
        AnnealingSchedule(np.array([1.0, 1.0]))
    with pytest.raises(ConfigError):
        AnnealingSchedule(np.array([-1.0, 1.0]))


def test_conditional_prob_zero_field_is_half():
    model = IsingModel.from_edges([0.0], [])
    assert conditional_prob(model, [0], 0, 1.0) == 0.5


def test_conditional_prob_saturates_at_large_beta():
    model = IsingModel.from_edges([1.0], [])
    assert conditional_prob(model, [0], 0, 1e4) == 1.0
    neg = IsingModel.from_edges([-1.0], [])
    assert conditional_prob(neg, [0], 0, 1e4) == 0.0


def test_conditional_prob_cancelling_neighbor():
    # field = m - J*s_j = 1 - 1 = 0, so probability 0.5 at any beta
    model = IsingModel.from_edges([1.0, 0.0], [(0, 1, 1.0)])
    assert conditional_prob(model, [0, 1], 0, 0.5) == 0.5


def test_conditional_prob_detailed_balance_identity():
    # P(s_i=1|rest)/P(s_i=0|rest) must equal exp(-beta * flip gap)
    rng = np.random.default_rng(11)
    for _ in range(200):
        n = int(rng.integers(2, 9))
        biases = rng.uniform(0.0, 1.0, n)
        edges = [
            (i, j, float(rng.uniform(-0.8, 0.8)))
            for i in range(n)
            for j in range(i + 1, n)
            if rng.random() < 0.4
        ]
        model = IsingModel.from_edges(biases, edges)
        state = rng.integers(0, 2, n)
        i = int(rng.integers(0, n))
        beta = float(rng.uniform(0.05, 1.5))
        p = conditional_prob(model, state, i, beta)
        hi, lo = state.copy(), state.copy()
        hi[i], lo[i] = 1, 0
        from isingtrack.ising import energy

        gap = energy(model, hi) - energy(model, lo)
        assert p / (1.0 - p) == pytest.approx(np.exp(-beta * gap), rel=1e-12)


def test_gibbs_sweep_visits_every_node():
    # with saturated fields one sweep moves all spins to their minimum
    model = IsingModel.from_edges([50.0] * 6, [(0, 1, -10.0), (2, 3, -10.0)])
    part = color_blocks(model)
    rng = np.random.default_rng(0)
    out = gibbs_sweep(model, np.zeros(6, dtype=np.int8), part, 5.0, rng)
    assert out.tolist() == [1] * 6


def test_gibbs_sweep_is_pure_and_seed_deterministic():
    model = IsingModel.from_edges([0.3, -0.2, 0.1], [(0, 1, 0.5)])
    part = color_blocks(model)
    start = np.array([0, 1, 0], dtype=np.int8)
    a = gibbs_sweep(model, start, part, 1.0, np.random.default_rng(5))
    b = gibbs_sweep(model, start, part, 1.0, np.random.default_rng(5))
    assert start.tolist() == [0, 1, 0]
    assert a.tolist() == b.tolist()


def test_gibbs_sweep_infinite_temperature_is_fair_coin():
    model = IsingModel.from_edges([100.0], [])
    part = color_blocks(model)
    rng = np.random.default_rng(33)
    state = np.zeros(1, dtype=np.int8)
    hits = 0
    n = 4000
    for _ in range(n):
        state = gibbs_sweep(model, state, part, 0.0, rng)
        hits += int(state[0])
    # 3 sigma band around 0.5 for a fair coin
    assert abs(hits / n - 0.5) < 3 * 0.5 / np.sqrt(n)


def test_run_chains_single_free_spin_near_half():
    model = IsingModel.from_edges([0.0], [])
    sched = AnnealingSchedule(np.array([1.0]))
    cfg = small_config(samples_per_temp=2000, steps_per_sample=1)
    freqs = run_chains(model, sched, cfg)
    n = freqs.n_samples_total
    assert n == cfg.n_chains * 2000
    assert abs(freqs.freq[0] - 0.5) < 3 * 0.5 / np.sqrt(n)


def test_run_chains_bitwise_reproducible():
    rng = np.random.default_rng(3)
    model = IsingModel.from_edges(
        rng.uniform(0, 2, 8),
        [(0, 1, 1.0), (2, 5, -0.7), (3, 4, 0.4), (6, 7, 1.3)],
    )
    sched = build_annealing_schedule(4)
    a = run_chains(model, sched, small_config())
    b = run_chains(model, sched, small_config())
    assert np.array_equal(a.freq, b.freq)
    assert np.array_equal(a.freq_per_beta, b.freq_per_beta)
    assert np.array_equal(a.mean_energy_per_beta, b.mean_energy_per_beta)
    assert a.n_samples_total == b.n_samples_total
    c = run_chains(model, sched, small_config(seed=999))
    assert not np.array_equal(a.freq, c.freq)


@pytest.mark.skipif(not compiled_available(), reason="compiled kernel not built")
def test_backends_produce_identical_streams():
    rng = np.random.default_rng(17)
    model = IsingModel.from_edges(
        rng.uniform(-1, 2, 10),
        [
            (i, j, float(rng.uniform(-1.5, 1.5)))
            for i in range(10)
            for j in range(i + 1, 10)
            if rng.random() < 0.35
        ],
    )
    sched = build_annealing_schedule(3)
    cfg = small_config()
    py = run_chains(model, sched, cfg, backend="python")
    cy = run_chains(model, sched, cfg, backend="compiled")
    assert np.array_equal(py.freq, cy.freq)
    assert np.array_equal(py.freq_per_beta, cy.freq_per_beta)
    assert np.array_equal(py.mean_energy_per_beta, cy.mean_energy_per_beta)
    masks_py = sample_states(model, sched, cfg, backend="python")
    masks_cy = sample_states(model, sched, cfg, backend="compiled")
    assert np.array_equal(masks_py, masks_cy)


def test_frequency_monotone_in_bias_on_edgeless_model():
    model = IsingModel.from_edges([-1.0, -0.5, 0.0, 0.5, 1.0], [])
    sched = AnnealingSchedule(np.array([1.0]))
    cfg = small_config(n_chains=8, samples_per_temp=3000, steps_per_sample=1)
    freqs = run_chains(model, sched, cfg)
    assert np.all(np.diff(freqs.freq) > 0)
    # independent spins: compare each to its exact sigmoid marginal
    expected = 1.0 / (1.0 + np.exp(-model.biases))
    assert np.allclose(freqs.freq, expected, atol=0.02)


def test_two_spin_antiferromagnet_excludes_coselection():
    # beta low enough that chains hop between (1,0) and (0,1), J high
    # enough that co-selection stays Boltzmann-negligible
    model = IsingModel.from_edges([2.0, 2.0], [(0, 1, 50.0)])
    sched = AnnealingSchedule(np.array([2.0]))
    cfg = small_config(
        n_chains=8, warmup_iters=200, samples_per_temp=3000, steps_per_sample=3
    )
    masks = sample_states(model, sched, cfg)
    states = unpack_states(masks, 2).reshape(-1, 2)
    f = states.mean(axis=0)
    assert abs(f[0] - 0.5) < 0.08 and abs(f[1] - 0.5) < 0.08
    co_rate = np.mean(states.sum(axis=1) == 2)
    assert co_rate < 0.01


def test_sampled_distribution_matches_enumeration():
    # compact version of the statistical acceptance check: one 6-spin model
    rng = np.random.default_rng(8)
    n = 6
    biases = rng.uniform(0, 3, n)
    edges = [
        (i, j, float(rng.uniform(-2, 2)))
        for i in range(n)
        for j in range(i + 1, n)
        if rng.random() < 0.5
    ]
    model = IsingModel.from_edges(biases, edges)
    beta = 2.0
    sched = AnnealingSchedule(np.geomspace(0.5, beta, 4))
    cfg = small_config(
        n_chains=8, warmup_iters=300, samples_per_temp=6000, steps_per_sample=3
    )
    masks = sample_states(model, sched, cfg)[:, -1, :]  # final temperature only
    states = unpack_states(masks, n).reshape(-1, n)
    counts = {}
    for s in map(tuple, states.tolist()):
        counts[s] = counts.get(s, 0) + 1
    total = states.shape[0]
    empirical = {s: c / total for s, c in counts.items()}
    exact = boltzmann_distribution(biases, edges, beta)
    assert tv_distance(empirical, exact) < 0.03


def test_aggregate_frequencies_examples():
    f = aggregate_frequencies(np.array([[1, 0], [1, 1]]))
    assert f.freq.tolist() == [1.0, 0.5]
    assert f.n_samples_total == 2

    same = aggregate_frequencies(np.array([[0, 1, 1]] * 3))
    assert same.freq.tolist() == [0.0, 1.0, 1.0]

    hand = np.array([[1, 0, 0], [1, 1, 0], [0, 1, 0], [1, 1, 0]])
    f4 = aggregate_frequencies(hand)
    assert f4.freq.tolist() == [0.75, 0.75, 0.0]

    with pytest.raises(ValueError):
        aggregate_frequencies(np.empty((0, 3)))


def test_rhat_diagnostic_populated():
    model = IsingModel.from_edges([0.5, -0.5], [(0, 1, 1.0)])
    sched = build_annealing_schedule(3)
    freqs = run_chains(model, sched, small_config())
    assert freqs.rhat_max is not None
    assert freqs.rhat_max >= 0.0
    assert freqs.freq_per_beta.shape == (3, 2)
    assert freqs.mean_energy_per_beta.shape == (3,)


def test_selection_frequencies_validation():
    with pytest.raises(ValueError):
        SelectionFrequencies(freq=np.array([1.2]), n_samples_total=10)
    with pytest.raises(ValueError):
        SelectionFrequencies(freq=np.array([0.5]), n_samples_total=0)


def test_sampler_config_validation():
    with pytest.raises(ConfigError):
        small_config(n_chains=0)
    with pytest.raises(ConfigError):
        small_config(samples_per_temp=0)
    with pytest.raises(ConfigError):
        small_config(steps_per_sample=0)
    with pytest.raises(ConfigError):
        small_config(warmup_iters=-1)
    with pytest.raises(ConfigError):
        small_config(blocking="diagonal")
