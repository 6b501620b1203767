#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python reference.

Each workload drives both backends with identical pre-drawn site/uniform
arrays, checks that the outputs agree bit for bit, and reports steps per
second with the compiled/python speedup. Run from the repository root:

    python benchmarks/bench_backends.py [--repeat 3] [--scale 1.0]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from mixlab._kernels import BACKEND, _ref
from mixlab.dynamics import ChainSpec, block_tables
from mixlab.model import IsingModel

try:
    from mixlab._kernels import _core
except ImportError:
    _core = None


def ring_model(n: int, seed: int) -> IsingModel:
    gen = np.random.default_rng(seed)
    edges = [(v, (v + 1) % n, float(gen.uniform(0.2, 0.8))) for v in range(n)]
    return IsingModel(n, edges, field=gen.uniform(0.0, 0.3, size=n))


def draws(T: int, m: int, seed: int):
    gen = np.random.default_rng(seed)
    return (gen.integers(0, m, size=T, dtype=np.int64),
            gen.random(T, dtype=np.float64))


def workload_single(T: int):
    model = ring_model(256, 1)
    sites, unis = draws(T, model.n, 2)
    fmask = np.ones(model.n, dtype=np.int8)
    sums = np.zeros(T, dtype=np.int64)

    def run(impl):
        spins = np.ones(model.n, dtype=np.int8)
        final = impl.run_glauber(spins, model.adj_indptr, model.adj_indices,
                                 model.adj_weights, model.field, fmask,
                                 sites, unis, sums, True)
        return final, spins.copy(), sums.copy()

    return run


def workload_coupled(T: int):
    model = ring_model(256, 3)
    sites, unis = draws(T, model.n, 4)
    fmask = np.ones(model.n, dtype=np.int8)
    dist = np.zeros(T, dtype=np.int64)
    sh = np.zeros(T, dtype=np.int64)
    sl = np.zeros(T, dtype=np.int64)

    def run(impl):
        hi = np.ones(model.n, dtype=np.int8)
        lo = -np.ones(model.n, dtype=np.int8)
        d, viol = impl.run_glauber_coupled(
            hi, lo, model.adj_indptr, model.adj_indices, model.adj_weights,
            model.field, fmask, sites, unis, dist, sh, sl, True)
        return d, viol, hi.copy(), lo.copy(), dist.copy(), sh.copy(), sl.copy()

    return run


def _dense_tables(n: int, k: int, variant: str, seed: int):
    gen = np.random.default_rng(seed)
    edges = [(u, v, float(gen.uniform(0.0, 0.6)))
             for u in range(n) for v in range(u + 1, n) if gen.random() < 0.4]
    model = IsingModel(n, edges, field=gen.uniform(0.0, 0.2, size=n))
    spec = ChainSpec(model, tracked=tuple(range(0, 2 * k, 2)), variant=variant,
                     block_mode="exact")
    return model, spec, block_tables(spec)


def workload_block_marginal(T: int):
    _, spec, tables = _dense_tables(16, 6, "z_chain", 5)
    sites, unis = draws(T, spec.k, 6)
    sums = np.zeros(T, dtype=np.int64)

    def run(impl):
        z = np.ones(spec.k, dtype=np.int8)
        final = impl.run_block_marginal(z, *tables.marginal_args(), sites,
                                        unis, tables.scratch(), sums, True)
        return final, z.copy(), sums.copy()

    return run


def workload_block_coupled(T: int):
    _, spec, tables = _dense_tables(16, 6, "z_chain", 7)
    sites, unis = draws(T, spec.k, 8)
    dist = np.zeros(T, dtype=np.int64)
    sh = np.zeros(T, dtype=np.int64)
    sl = np.zeros(T, dtype=np.int64)

    def run(impl):
        z_hi = np.ones(spec.k, dtype=np.int8)
        z_lo = -np.ones(spec.k, dtype=np.int8)
        d, viol = impl.run_block_marginal_coupled(
            z_hi, z_lo, *tables.marginal_args(), sites, unis,
            tables.scratch(), dist, sh, sl, True)
        return d, viol, z_hi.copy(), z_lo.copy(), dist.copy()

    return run


def workload_block_full(T: int):
    model, spec, tables = _dense_tables(16, 6, "accelerated", 9)
    sites, unis = draws(T, spec.k, 10)
    fmask = np.zeros(model.n, dtype=np.int8)
    fmask[list(spec.tracked)] = 1
    sums = np.zeros(T, dtype=np.int64)

    def run(impl):
        spins = np.ones(model.n, dtype=np.int8)
        final = impl.run_block_full(spins, *tables.full_args(), fmask, sites,
                                    unis, tables.scratch(), sums, True)
        return final, spins.copy(), sums.copy()

    return run


WORKLOADS = [
    ("single-site sweep (n=256)", workload_single, 100_000),
    ("coupled single-site (n=256)", workload_coupled, 50_000),
    ("tracked-set block marginal (n=16, k=6)", workload_block_marginal, 1_500),
    ("coupled block marginal (n=16, k=6)", workload_block_coupled, 800),
    ("full block resample (n=16, k=6)", workload_block_full, 800),
]


def _same(a, b) -> bool:
    if len(a) != len(b):
        return False
    return all(np.array_equal(x, y) for x, y in zip(a, b))


def best_time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3,
                    help="timing repetitions per backend (best is kept)")
    ap.add_argument("--scale", type=float, default=1.0,
                    help="multiply every workload's step count")
    args = ap.parse_args()

    print(f"default backend: {BACKEND}; compiled extension "
          f"{'present' if _core is not None else 'MISSING'}")
    header = (f"{'workload':42s} {'steps':>9s} {'python':>12s} "
              f"{'compiled':>12s} {'speedup':>8s}  parity")
    print(header)
    print("-" * len(header))
    all_par = True
    for name, factory, T in WORKLOADS:
        T = max(1, int(T * args.scale))
        run = factory(T)
        t_ref = best_time(lambda: run(_ref), args.repeat)
        line = f"{name:42s} {T:9d} {T / t_ref:12.3e}"
        if _core is None:
            print(line + f" {'—':>12s} {'—':>8s}  (python only)")
            continue
        t_core = best_time(lambda: run(_core), args.repeat)
        par = _same(run(_ref), run(_core))
        all_par = all_par and par
        print(line + f" {T / t_core:12.3e} {t_ref / t_core:7.1f}x"
                     f"  {'ok' if par else 'MISMATCH'}")
    if not all_par:
        print("backend outputs differ — investigate before trusting results")
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
