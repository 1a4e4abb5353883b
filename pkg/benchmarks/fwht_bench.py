"""Throughput comparison of the two transform backends.

The dispatched kernel honours SEEDLESS_DI_BACKEND, so this script times
the numba path against the pure-numpy fallback directly and checks they
agree bitwise.

Usage: python benchmarks/fwht_bench.py [max_bits]
"""

import sys
import time

import numpy as np

from seedless_di import _kernels


def bench(fn, vec, warmup=2, repeat=5):
    for _ in range(warmup):
        fn(vec.copy())
    best = float("inf")
    for _ in range(repeat):
        work = vec.copy()
        t0 = time.perf_counter()
        fn(work)
        best = min(best, time.perf_counter() - t0)
    return best


def numba_path(vec):
    if not _kernels._HAVE_NUMBA:
        raise SystemExit("numba backend unavailable; set SEEDLESS_DI_BACKEND=numba")
    _kernels._fwht_numba(vec)


def main():
    max_bits = int(sys.argv[1]) if len(sys.argv) > 1 else 22
    rng = np.random.default_rng(0)
    print(f"{'bits':>5} {'numpy (s)':>12} {'numba (s)':>12} {'speedup':>9}")
    for bits in range(12, max_bits + 1, 2):
        vec = rng.standard_normal(1 << bits)
        a = vec.copy()
        b = vec.copy()
        _kernels._fwht_numpy(a)
        numba_path(b)
        assert np.array_equal(a, b), "backends diverged"
        t_np = bench(_kernels._fwht_numpy, vec)
        t_nb = bench(numba_path, vec)
        print(f"{bits:>5} {t_np:>12.6f} {t_nb:>12.6f} {t_np / t_nb:>8.1f}x")


if __name__ == "__main__":
    main()
