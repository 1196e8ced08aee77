#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-numpy fallback.

Runs the two hot loops on representative workloads:
  * eg_fit   -- the exponentiated-gradient logistic solve used by every
                regression in structure recovery (collapsed design matrix),
  * gibbs    -- block-Gibbs chain stepping.

Usage: python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import time

import numpy as np

from rbmnet._kernels import fallback

try:
    from rbmnet._kernels import _core
except ImportError:
    _core = None


def _eg_workload(seed=0, K=2048, p=67):
    rng = np.random.default_rng(seed)
    F = rng.choice(np.array([-1.0, 1.0]), size=(K, p))
    w_true = np.zeros(p)
    w_true[1:4] = (0.4, 0.4, -0.3)
    mu = np.tanh(F @ w_true)
    wpos = (1 + mu) / 2
    wneg = (1 - mu) / 2
    tot = wpos.sum() + wneg.sum()
    return np.ascontiguousarray(F), wpos / tot, wneg / tot


def _gibbs_workload(seed=0, nv=64, nh=32, steps=6000):
    rng = np.random.default_rng(seed)
    W = rng.normal(size=(nv, nh)) * 0.2
    b_vis = rng.normal(size=nv) * 0.1
    b_hid = rng.normal(size=nh) * 0.1
    x0 = rng.choice(np.array([-1, 1], dtype=np.int8), size=nv)
    uniforms = rng.random((steps, nh + nv))
    return W, b_vis, b_hid, x0, uniforms, 0, steps, 1


def _time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    eg = _eg_workload()
    gibbs = _gibbs_workload()
    rows = []
    for name, mod in (("fallback", fallback),) + (
            (("compiled", _core),) if _core else ()):
        t_eg = _time(lambda m=mod: m.eg_fit(*eg, 2.0, 400, 1e-5),
                     args.repeat)
        t_gb = _time(lambda m=mod: m.gibbs_chain(*gibbs), args.repeat)
        rows.append((name, t_eg, t_gb))

    print(f"{'impl':10s} {'eg_fit (2048x67)':>18s} {'gibbs (64+32, 6k steps)':>24s}")
    for name, t_eg, t_gb in rows:
        print(f"{name:10s} {t_eg * 1e3:15.1f} ms {t_gb * 1e3:21.1f} ms")
    if len(rows) == 2:
        print(f"{'speedup':10s} {rows[0][1] / rows[1][1]:15.1f} x "
              f"{rows[0][2] / rows[1][2]:20.1f} x")
    else:
        print("compiled kernels unavailable; fallback only")


if __name__ == "__main__":
    main()
