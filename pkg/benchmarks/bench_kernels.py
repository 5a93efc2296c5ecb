"""Time the compiled and numpy advance kernels on the same workload.

    python3 benchmarks/bench_kernels.py [--n 200 400 800] [--t-end 20] [--repeat 3]

Both variants are imported from ``vacuumfront.kernels`` directly, so the
environment flag does not matter here.  The first compiled call is a
warm-up and is not timed.
"""
import argparse
import math
import time

import numpy as np

from vacuumfront import kernels, solve_profile_constants
from vacuumfront._jit import HAVE_NUMBA
from vacuumfront.solver1d import make_grid1d
from vacuumfront.solver3d import make_grid3d


def _case_1d(n):
    g = make_grid1d(solve_profile_constants(2.0, 1.0, 1), n)

    def go(advance, t_end):
        eta, v = g.x.copy(), g.x / g.profile.k
        F = np.empty_like(eta)
        kernels.forces1d_np(eta, g.S, g.dx, 2.0, F)
        bufs = [np.empty(1 << 20) for _ in range(3)]
        return advance(eta, v, F, g.m, g.S, g.c0sq, g.dx, 2.0, 0.0, t_end, 0.4, math.inf,
                       *bufs)[1]
    return go


def _case_3d(n):
    g = make_grid3d(solve_profile_constants(2.0, 1.0, 3), n)

    def go(advance, t_end):
        eta, v = g.r.copy(), g.r / g.profile.k
        F = np.empty_like(eta)
        kernels.forces3d_np(eta, g.Sf, g.dvol, 2.0, F)
        bufs = [np.empty(1 << 20) for _ in range(2)]
        return advance(eta, v, F, g.m, g.Sf, g.r0gm1, g.dvol, g.dr, 2.0, 0.0, t_end, 0.4,
                       math.inf, *bufs)[1]
    return go


def best_of(fn, repeat):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        steps = fn()
        best = min(best, time.perf_counter() - t0)
    return best, steps


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[200, 400, 800])
    ap.add_argument("--t-end", type=float, default=20.0)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    print(f"{'dim':>3} {'N':>5} {'steps':>7} {'numba [s]':>10} {'numpy [s]':>10} {'speedup':>8}")
    for dim, make, nb, npy in ((1, _case_1d, kernels.advance1d_nb, kernels.advance1d_np),
                               (3, _case_3d, kernels.advance3d_nb, kernels.advance3d_np)):
        for n in args.n:
            go = make(n)
            go(nb, 1e-3)   # compile
            t_nb, steps = best_of(lambda: go(nb, args.t_end), args.repeat)
            t_np, _ = best_of(lambda: go(npy, args.t_end), args.repeat)
            print(f"{dim:>3} {n:>5} {steps:>7} {t_nb:>10.4f} {t_np:>10.4f} {t_np / t_nb:>8.1f}")


if __name__ == "__main__":
    main()
