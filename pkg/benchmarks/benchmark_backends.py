"""Benchmark the compiled Gibbs kernel against the pure-Python fallback.

Runs the same annealed ensemble on both backends, reports sweep throughput
and speedup, and verifies the two backends produce bit-identical frequency
streams (they must: both consume the same PCG64 draws in the same order).

Usage:
    python benchmarks/benchmark_backends.py [--n 100] [--density 0.1]
        [--chains 4] [--temps 13] [--warmup 500] [--samples 200] [--steps 5]
"""

import argparse
import time

import numpy as np

from isingtrack.ising import IsingModel
from isingtrack.kernels import compiled_available
from isingtrack.sampler import SamplerConfig, build_annealing_schedule, run_chains


def build_model(n: int, density: float, rng: np.random.Generator) -> IsingModel:
    biases = rng.uniform(0.0, 3.0, n)
    edges = [
        (i, j, float(rng.uniform(0.2, 1.6)))
        for i in range(n)
        for j in range(i + 1, n)
        if rng.random() < density
    ]
    return IsingModel.from_edges(biases, edges)


def total_sweeps(cfg: SamplerConfig) -> int:
    per_temp = cfg.warmup_iters + cfg.samples_per_temp * cfg.steps_per_sample
    return cfg.n_chains * cfg.n_temperatures * per_temp


def bench(model, schedule, cfg, backend: str):
    start = time.perf_counter()
    freqs = run_chains(model, schedule, cfg, backend=backend)
    elapsed = time.perf_counter() - start
    return elapsed, freqs


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=100, help="number of spins")
    ap.add_argument("--density", type=float, default=0.1, help="edge probability")
    ap.add_argument("--chains", type=int, default=4)
    ap.add_argument("--temps", type=int, default=13)
    ap.add_argument("--warmup", type=int, default=500)
    ap.add_argument("--samples", type=int, default=200)
    ap.add_argument("--steps", type=int, default=5)
    ap.add_argument("--seed", type=int, default=20240915)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    model = build_model(args.n, args.density, rng)
    schedule = build_annealing_schedule(args.temps)
    cfg = SamplerConfig(
        n_chains=args.chains,
        n_temperatures=args.temps,
        warmup_iters=args.warmup,
        samples_per_temp=args.samples,
        steps_per_sample=args.steps,
        seed=args.seed,
    )
    sweeps = total_sweeps(cfg)
    print(f"model: n={model.n}, edges={model.n_edges}")
    print(f"work:  {cfg.n_chains} chains x {cfg.n_temperatures} temps, {sweeps} sweeps total")

    t_py, f_py = bench(model, schedule, cfg, "python")
    print(f"python:   {t_py:8.3f} s  ({sweeps / t_py:12.0f} sweeps/s)")

    if not compiled_available():
        print("compiled: extension not built; skipping comparison")
        return 0

    t_c, f_c = bench(model, schedule, cfg, "compiled")
    print(f"compiled: {t_c:8.3f} s  ({sweeps / t_c:12.0f} sweeps/s)")
    print(f"speedup:  {t_py / t_c:.1f}x")

    identical = np.array_equal(f_py.freq, f_c.freq) and np.array_equal(
        f_py.freq_per_beta, f_c.freq_per_beta
    )
    print(f"identical frequency streams: {identical}")
    return 0 if identical else 1


if __name__ == "__main__":
    raise SystemExit(main())
