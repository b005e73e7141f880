"""Time the Sturm-count and bisection kernels with the numba and numpy backends.

    python3 benchmarks/bench_kernels.py [--hbar 0.025] [--repeat 5]

Both backends run on the same double-well operator; the script checks that
they return identical eigenvalues and prints the best-of-N wall time.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from semispec import HAS_NUMBA, builtin
from semispec.kernels import bisect_eigenvalues, sturm_counts
from semispec.oracle import Grid, TridiagonalOperator


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--hbar", type=float, default=0.025)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    op = TridiagonalOperator.build(builtin("double_well"), Grid.auto((-2.2, 2.2), args.hbar), args.hbar)
    shifts = np.linspace(0.0, 1.0, 512)
    window = (0.2, 0.8)
    backends = ["numpy"] + (["numba"] if HAS_NUMBA else [])
    print(f"n = {op.grid.n} interior nodes, {shifts.size} shifts, window {window}")
    results = {}
    for b in backends:
        # first call compiles under numba; keep it out of the timing
        sturm_counts(op.diag, op.off2, shifts[:2], b)
        bisect_eigenvalues(op.diag, op.off2, *window, 1e-12, b)
        t_count, counts = best_of(lambda: sturm_counts(op.diag, op.off2, shifts, b), args.repeat)
        t_bis, (vals, _, _) = best_of(lambda: bisect_eigenvalues(op.diag, op.off2, *window, 1e-12, b),
                                      args.repeat)
        results[b] = (counts, vals)
        print(f"{b:>6}: sturm_counts {t_count * 1e3:9.2f} ms   bisection ({vals.size} values) {t_bis * 1e3:9.2f} ms")
    if len(results) == 2:
        same_counts = np.array_equal(results["numpy"][0], results["numba"][0])
        gap = float(np.max(np.abs(results["numpy"][1] - results["numba"][1])))
        print(f"backends agree: counts {same_counts}, max eigenvalue difference {gap:.1e}")
    else:
        print("numba unavailable or disabled (SEMISPEC_NO_NUMBA); numpy only")


if __name__ == "__main__":
    main()
