"""Compare the compiled and pure-Python interpreter kernels.

    python benchmarks/bench_kernel.py [--repeat 3] [--layer 6] [--rho 16]

Both kernels get identical inputs and their results are checked for equality
before any timing is reported.
"""

import argparse
import sys
import time

from sskit.dist import FiniteDistribution
from sskit.equivalence import derive_params, z_encoding
from sskit.machine import DEFAULT_BUDGET, Program, kernel


def best_of(repeat, fn, *args):
    times, result = [], None
    for _ in range(repeat):
        start = time.perf_counter()
        result = fn(*args)
        times.append(time.perf_counter() - start)
    return min(times), result


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--layer", type=int, default=6, help="opcode count for the survey workload")
    ap.add_argument("--rho", type=int, default=16, help="random tape length for the seed workload")
    args = ap.parse_args(argv)

    compiled = kernel.compiled_kernel()
    if compiled is None:
        print("compiled kernel not built; nothing to compare", file=sys.stderr)
        return 1

    budget = DEFAULT_BUDGET.as_args()
    z = z_encoding(FiniteDistribution.uniform(2), derive_params(2, 1).k).encode()
    ops = Program(bytes([7, 5] * args.rho)).ops
    workloads = {
        f"survey(layer={args.layer})": (lambda k: k.survey(args.layer, b"", z, b"", *budget)),
        f"seed_histogram(rho={args.rho})": (
            lambda k: k.seed_histogram(ops, b"", args.rho, 0, 2**args.rho, *budget)),
    }

    print(f"{'workload':<26}{'python s':>11}{'compiled s':>12}{'speedup':>9}")
    for name, work in workloads.items():
        t_py, r_py = best_of(args.repeat, work, kernel.python_kernel)
        t_c, r_c = best_of(args.repeat, work, compiled)
        if r_py != r_c:
            print(f"{name}: kernels disagree", file=sys.stderr)
            return 2
        print(f"{name:<26}{t_py:>11.3f}{t_c:>12.4f}{t_py / t_c:>8.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
