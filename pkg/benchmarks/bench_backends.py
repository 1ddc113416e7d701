"""Compiled vs pure-Python coordinate-descent kernels.

    python benchmarks/bench_backends.py [--repeat 3]

Times a LASSO and a SCAD path on a Gram problem, the residual-update path on
a wide problem, and a full ``run_acd`` on the motivating-example layout.
"""
import argparse
import time

import numpy as np

from acd import _cd_py, penalized
from acd.core import run_acd
from acd.penalized import LASSO, SCAD
from acd.sim import gen_model, motivating

try:
    from acd import _cd_fast
except ImportError:
    _cd_fast = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def problem(m, p, seed=0):
    r = np.random.default_rng(seed)
    X = r.standard_normal((m, p))
    X -= X.mean(axis=0)
    y = X[:, :5] @ [3.0, -2.0, 1.5, 1.0, 0.5] + r.standard_normal(m)
    y -= y.mean()
    return X, y


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _cd_fast is None:
        raise SystemExit("compiled kernels not built; run pip install -e . first")

    X, y = problem(100, 50)
    G, b = X.T @ X / 100, X.T @ y / 100
    lams = np.geomspace(np.abs(b).max(), 0.01 * np.abs(b).max(), 50)
    Xw, yw = problem(80, 1500, seed=1)
    lw = np.geomspace(np.abs(Xw.T @ yw).max() / 80, 0.05 * np.abs(Xw.T @ yw).max() / 80, 20)
    Xwt = np.ascontiguousarray(Xw.T)
    cases = [
        ("gram path lasso  (m=100, p=50)", lambda k: k.path_gram(G, b, lams, 0, 3.7, 1e-7, 10_000)),
        ("gram path scad   (m=100, p=50)", lambda k: k.path_gram(G, b, lams, 1, 3.7, 1e-7, 10_000)),
        ("resid path lasso (m=80, p=1500)", lambda k: k.path_resid(Xwt, yw, lw, 0, 3.7, 1e-7, 10_000)),
    ]
    print(f"{'case':34s} {'cython':>10s} {'python':>10s} {'speedup':>8s}")
    for name, fn in cases:
        tf = best_of(lambda: fn(_cd_fast), args.repeat)
        ts = best_of(lambda: fn(_cd_py), 1)
        print(f"{name:34s} {tf:10.4f} {ts:10.4f} {ts / tf:7.1f}x")

    d = gen_model(motivating(), np.random.default_rng(0)).data
    for pen in (LASSO, SCAD):
        name = f"run_acd {pen.family:5s} (n=100, p=10)"
        tf = best_of(lambda: run_acd(d, pen, seed=0, threads=1), args.repeat)
        penalized.kernels = _cd_py
        try:
            ts = best_of(lambda: run_acd(d, pen, seed=0, threads=1), 1)
        finally:
            penalized.kernels = _cd_fast
        print(f"{name:34s} {tf:10.4f} {ts:10.4f} {ts / tf:7.1f}x")


if __name__ == "__main__":
    main()
