"""Time the numba and numpy implementations of the hot kernels side by side.

    python3 benchmarks/bench_backends.py [--repeat 5] [--n 1000]

The first numba call compiles (or loads the on-disk cache), so it is timed
separately and excluded from the steady-state numbers.
"""

import argparse
import time

import numpy as np

from mvrkm import _accel


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--n", type=int, default=1000, help="rows in each kernel operand")
    ap.add_argument("--dim", type=int, default=40, help="columns (lag window length)")
    ap.add_argument("--steps", type=int, default=4001, help="Lorenz Euler steps")
    args = ap.parse_args()

    if not _accel.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    rng = np.random.default_rng(0)
    A = rng.normal(size=(args.n, args.dim))
    B = rng.normal(size=(args.n, args.dim))
    s0 = np.array([1.0, -1.0, 1.05])

    cases = [
        ("sqdist", lambda: _accel.sqdist_numpy(A, B), lambda: _accel.sqdist_numba(A, B)),
        ("rbf_cross", lambda: _accel.rbf_cross_numpy(A, B, 2.0), lambda: _accel.rbf_cross_numba(A, B, 2.0)),
        ("euler_lorenz",
         lambda: _accel.euler_lorenz_numpy(s0, 10.0, 28.0, 2.667, 0.01, args.steps),
         lambda: _accel.euler_lorenz_numba(s0, 10.0, 28.0, 2.667, 0.01, args.steps)),
    ]

    print(f"active backend: {_accel.BACKEND}; operands {args.n}x{args.dim}, {args.steps} Euler steps")
    print(f"{'kernel':<14}{'numpy [ms]':>12}{'numba [ms]':>12}{'first call':>12}{'speedup':>10}{'max |diff|':>12}")
    for name, f_np, f_nb in cases:
        t0 = time.perf_counter()
        out_nb = f_nb()
        first = time.perf_counter() - t0
        out_np = f_np()
        t_np = best_of(f_np, args.repeat)
        t_nb = best_of(f_nb, args.repeat)
        diff = float(np.max(np.abs(out_np - out_nb)))
        print(f"{name:<14}{t_np * 1e3:>12.3f}{t_nb * 1e3:>12.3f}{first * 1e3:>12.1f}"
              f"{t_np / t_nb:>9.2f}x{diff:>12.2e}")


if __name__ == "__main__":
    main()
