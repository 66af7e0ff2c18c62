"""Compiled kernels vs the numpy fallback.

    python3 benchmarks/bench_kernels.py            # n_exp 10 and 13
    python3 benchmarks/bench_kernels.py --n-exp 15 --repeat 3

Prints the best-of-``repeat`` wall time per kernel for each backend and the
speedup. Byte kernels are skipped above n_exp 13 (1 GiB per buffer at 15).
"""

import argparse
import time

import numpy as np

from wedgemix import _fallback, kernels
from wedgemix.advection import shear_shifts
from wedgemix.analyzer import DEFAULT_KAPPA, popcount_bounds


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(n_exp, rng):
    side = 1 << n_exp
    shifts = shear_shifts(side, int(rng.integers(side)), 3)
    words = rng.integers(0, 2**63, size=(side, side // 64), dtype=np.uint64)
    wout = np.empty_like(words)
    bounds = [popcount_bounds(m, DEFAULT_KAPPA) for m in range(6)]
    lo, hi = [b[0] for b in bounds], [b[1] for b in bounds]
    counts = np.empty((side // 64, side // 64), dtype=np.int64)
    out = [
        ("shear_rows_packed", lambda m: m.shear_rows_packed(words, wout, shifts)),
        ("transpose_packed", lambda m: m.transpose_packed(words, wout)),
        ("packed_level_scan", lambda m: m.packed_level_scan(words, lo, hi, counts)),
    ]
    if n_exp <= 13:
        vals = (rng.integers(0, 2, size=(side, side), dtype=np.int8) * 2 - 1).astype(np.int8)
        vout = np.empty_like(vals)
        out += [
            ("shear_rows_bytes", lambda m: m.shear_rows_bytes(vals, vout, shifts)),
            ("shear_cols_bytes", lambda m: m.shear_cols_bytes(vals, vout, shifts)),
        ]
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-exp", type=int, nargs="+", default=[10, 13])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    core = kernels.compiled()
    if core is None:
        print("compiled extension not built; only the fallback can be timed")
    rng = np.random.default_rng(0)
    print(f"{'n_exp':>5}  {'kernel':<20} {'compiled s':>11} {'numpy s':>10} {'speedup':>8}")
    for n_exp in args.n_exp:
        for name, run in cases(n_exp, rng):
            t_np = best_of(lambda: run(_fallback), args.repeat)
            if core is None:
                print(f"{n_exp:>5}  {name:<20} {'-':>11} {t_np:>10.4f} {'-':>8}")
                continue
            t_c = best_of(lambda: run(core), args.repeat)
            print(f"{n_exp:>5}  {name:<20} {t_c:>11.4f} {t_np:>10.4f} {t_np / t_c:>7.1f}x")


if __name__ == "__main__":
    main()
