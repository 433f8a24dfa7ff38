#!/usr/bin/env python3
"""Compare the numba and numpy jet-kernel backends.

Two measurements:

* raw kernels: the product/chain updates on (N, d) batches, the inner loops
  of every grid sweep;
* end-to-end: the full hyperbolic-group check suite, run in a subprocess
  per backend so the SKEWSPIN_BACKEND environment flag is honored at import.

Usage: python3 benchmarks/bench_backends.py [--raw-n 2000000] [--grid 15]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))


def bench_raw(n, d=3, repeats=7):
    from skewspin import _kernels_numba, _kernels_numpy

    rng = np.random.default_rng(0)
    va, vb = rng.normal(size=(2, n))
    ga, gb = rng.normal(size=(2, n, d))
    ha, hb = rng.normal(size=(2, n, d, d))
    f1, f2 = rng.normal(size=(2, n))
    results = {}
    for name, mod in (("numpy", _kernels_numpy), ("numba", _kernels_numba)):
        # warm up (jit compilation for the numba path)
        mod.mul_grad(va, ga, vb, gb)
        mod.mul_hess(va, ga, ha, vb, gb, hb)
        mod.chain_grad(f1, ga)
        mod.chain_hess(f1, f2, ga, ha)
        best = np.inf
        for _ in range(repeats):
            t0 = time.perf_counter()
            mod.mul_grad(va, ga, vb, gb)
            mod.mul_hess(va, ga, ha, vb, gb, hb)
            mod.chain_grad(f1, ga)
            mod.chain_hess(f1, f2, ga, ha)
            best = min(best, time.perf_counter() - t0)
        results[name] = best
    return results


def bench_suite(grid):
    script = (
        "import time, skewspin.backend as b\n"
        "from skewspin import catalog\n"
        "from skewspin.cli import run_suites\n"
        "built = catalog.build('hyperbolic-group')\n"
        "run_suites(built, 'all', grid=5)  # warm up caches and jit\n"
        f"t0 = time.perf_counter(); rep = run_suites(catalog.build('hyperbolic-group'), 'all', grid={grid})\n"
        "dt = time.perf_counter() - t0\n"
        "assert rep.passed\n"
        "print(f'{b.backend_name()} {dt:.4f}')\n"
    )
    results = {}
    for backend in ("numpy", "numba"):
        env = dict(os.environ, SKEWSPIN_BACKEND=backend)
        env["PYTHONPATH"] = os.pathsep.join(
            [os.path.join(os.path.dirname(__file__), "..", "src"), env.get("PYTHONPATH", "")]
        )
        out = subprocess.run(
            [sys.executable, "-c", script], env=env, capture_output=True, text=True
        )
        if out.returncode != 0:
            raise RuntimeError(out.stderr)
        name, dt = out.stdout.split()[-2:]
        assert name == backend, (name, backend)
        results[backend] = float(dt)
    return results


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--raw-n", type=int, default=2_000_000)
    ap.add_argument("--grid", type=int, default=15)
    args = ap.parse_args()

    raw = bench_raw(args.raw_n)
    print(f"raw jet kernels on N = {args.raw_n}:")
    for name, dt in raw.items():
        print(f"  {name:6s} {dt * 1e3:9.2f} ms")
    print(f"  speedup numba vs numpy: {raw['numpy'] / raw['numba']:.2f}x")

    suite = bench_suite(args.grid)
    print(f"\nhyperbolic-group full suite on a {args.grid}^3 grid:")
    for name, dt in suite.items():
        print(f"  {name:6s} {dt:9.3f} s")
    print(f"  speedup numba vs numpy: {suite['numpy'] / suite['numba']:.2f}x")


if __name__ == "__main__":
    main()
