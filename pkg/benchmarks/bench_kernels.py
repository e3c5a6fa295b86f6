"""Compiled vs NumPy curvature kernels.

    python3 benchmarks/bench_kernels.py [--repeat 20]

Times both per-node kernels on random graphs at several sizes, checks that
the two backends agree, and times one manufactured solve per backend.
"""
import argparse
import time

import numpy as np

from hypercurv import SpaceForm, build_grid
from hypercurv.grid import covariant_gradient, covariant_hessian
from hypercurv.kernels import compiled_available, conformal_curvatures, radial_curvatures
from hypercurv.samples import MANUFACTURED_Z, manufactured_psi, random_smooth_graph
from hypercurv.solver import SolverConfig, continuation_solve

CASES = [(1, 256), (1, 4096), (2, 32), (2, 64), (2, 128)]


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        tic = time.perf_counter()
        fn()
        times.append(time.perf_counter() - tic)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    if not compiled_available():
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation` first")

    space = SpaceForm(-1)
    print(f"{'n':>2} {'nodes':>7} {'kernel':>10} {'python ms':>10} {'compiled ms':>12} {'speedup':>8} {'max diff':>10}")
    for n, res in CASES:
        grid = build_grid(n, res)
        z = random_smooth_graph(grid, space, seed=1).z
        v = space.t(0.5 * z)
        for name, kernel, field in (("radial", radial_curvatures, z), ("conformal", conformal_curvatures, v)):
            d, _ = covariant_gradient(grid, field)
            h = covariant_hessian(grid, field)
            call = {b: (lambda b=b: kernel(-1, field, d, h, grid.e, grid.e_inv, backend=b)) for b in ("python", "compiled")}
            t_py = best_of(call["python"], args.repeat)
            t_c = best_of(call["compiled"], args.repeat)
            diff = np.max(np.abs(call["python"]()[0] - call["compiled"]()[0]))
            print(f"{n:>2} {grid.size:>7} {name:>10} {1e3 * t_py:>10.3f} {1e3 * t_c:>12.3f} {t_py / t_c:>8.1f} {diff:>10.1e}")

    psi = manufactured_psi(MANUFACTURED_Z, 1, 1, 0.8, 1.6)
    grid = build_grid(1, 256)
    print("\nmanufactured solve, n=1, 256 nodes")
    for backend in ("python", "compiled"):
        cfg = SolverConfig(m=1, backend=backend)
        t = best_of(lambda: continuation_solve(psi, cfg, grid), 3)
        print(f"  {backend:>8}: {t:.3f} s")


if __name__ == "__main__":
    main()
