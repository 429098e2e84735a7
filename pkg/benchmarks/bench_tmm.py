#!/usr/bin/env python3
"""Throughput benchmark: compiled TMM kernel vs pure-numpy fallback.

Runs single-design and batched simulation at several layer counts and prints
a table of sims/second plus the speedup factor. The two backends must agree
numerically; the benchmark asserts parity to 1e-10 before timing.

Usage:  python benchmarks/bench_tmm.py [--batch 2048] [--repeats 5]
"""

import argparse
import time

import numpy as np

from filmstack import default_grid, load_default_db
from filmstack.dataset import SamplerConfig, keyed_design
from filmstack.tmm import _pure

try:
    from filmstack.tmm import _core
except ImportError:
    _core = None


def _pack(designs):
    mats = np.concatenate([np.asarray(d.materials, np.int64) for d in designs])
    thk = np.concatenate([np.asarray(d.thicknesses, np.float64) for d in designs])
    offsets = np.zeros(len(designs) + 1, np.int64)
    np.cumsum([d.n_layers for d in designs], out=offsets[1:])
    return mats, thk, offsets


def bench(kernel, mats, thk, offsets, nk, nsub, wl, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        kernel.simulate_rt_batch(mats, thk, offsets, nk, nsub, wl, 5e5)
        best = min(best, time.perf_counter() - t0)
    return (offsets.shape[0] - 1) / best


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--batch", type=int, default=2048)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    db = load_default_db()
    grid = default_grid()
    nk = np.ascontiguousarray(db.index_matrix(grid))
    nsub = np.ascontiguousarray(db.substrate_index(grid))
    wl = grid.array

    if _core is None:
        print("compiled kernel not available; showing pure backend only")

    print(f"{'layers':>8} {'pure sims/s':>14} {'compiled sims/s':>16} {'speedup':>9}")
    for layers in (2, 5, 10, 20):
        cfg = SamplerConfig(min_layers=layers, max_layers=layers, seed=args.seed)
        designs = [sample_design(args.seed, i, cfg) for i in range(args.batch)]
        mats, thk, offsets = _pack(designs)

        r_p, t_p = _pure.simulate_rt_batch(mats, thk, offsets, nk, nsub, wl, 5e5)
        if _core is not None:
            r_c, t_c = _core.simulate_rt_batch(mats, thk, offsets, nk, nsub, wl, 5e5)
            err = max(np.abs(r_p - r_c).max(), np.abs(t_p - t_c).max())
            assert err < 1e-10, f"backend mismatch: {err}"

        pure_rate = bench(_pure, mats, thk, offsets, nk, nsub, wl, args.repeats)
        if _core is not None:
            core_rate = bench(_core, mats, thk, offsets, nk, nsub, wl, args.repeats)
            print(f"{layers:>8} {pure_rate:>14.0f} {core_rate:>16.0f} {core_rate / pure_rate:>8.1f}x")
        else:
            print(f"{layers:>8} {pure_rate:>14.0f} {'-':>16} {'-':>9}")


if __name__ == "__main__":
    main()
