"""Time the oracle grid scan with the compiled kernel and the numpy fallback.

    python benchmarks/bench_oracle.py [--resolution 2e-3] [--repeat 3]
"""

import argparse
import time

import numpy as np

from hqcqp import Mode, QQ2Problem
from hqcqp.oracle import available_kernels, oracle_global


def instances():
    r2 = np.sqrt(2.0)
    yield "four minima (equality, n=3)", QQ2Problem(
        [[0, .5, 0], [.5, 0, 1.5], [0, 1.5, 0]], np.eye(3), np.diag([-20., 0, 10]), Mode.EQUALITY)
    yield "flat curve (equality, n=3)", QQ2Problem(
        [[-r2, .5, 0], [.5, 0, 0], [0, 0, 0]], np.eye(3), np.diag([2, .5, 1.]), Mode.EQUALITY)
    rng = np.random.default_rng(7)
    M = rng.standard_normal((3, 3))
    yield "random (inequality, n=3)", QQ2Problem(M + M.T, np.eye(3), np.diag([3., -1, .5]))
    M = rng.standard_normal((4, 4))
    yield "random (inequality, n=4)", QQ2Problem(M + M.T, np.eye(4), np.diag([3., -1, .5, 2]))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--resolution", type=float, default=2e-3)
    ap.add_argument("--resolution4", type=float, default=3e-2, help="resolution for n = 4")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    kernels = available_kernels()
    print(f"kernels: {', '.join(kernels)}")
    print(f"{'instance':28s} {'kernel':7s} {'points':>10s} {'best s':>9s} {'value':>20s}")
    for name, P in instances():
        res = args.resolution if P.n == 3 else args.resolution4
        values = {}
        for k in kernels:
            best = np.inf
            for _ in range(args.repeat):
                t = time.perf_counter()
                rep = oracle_global(P, res, kernel=k)
                best = min(best, time.perf_counter() - t)
            values[k] = rep.value
            print(f"{name:28s} {k:7s} {rep.n_feasible_samples:10d} {best:9.3f} {rep.value:20.14f}")
        if len(values) == 2:
            a, b = values.values()
            print(f"{'':28s} agreement |diff| = {abs(a - b):.2e}")


if __name__ == "__main__":
    main()
