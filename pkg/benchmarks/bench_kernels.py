"""Time the compiled click-pairing kernel against the pure-python fallback.

Usage: python3 benchmarks/bench_kernels.py [--rounds N] [--repeat K]
"""

import argparse
import time

import numpy as np

from qkdrate import kernels
from qkdrate.kernels import py_impl


def make_train(rng, n_rounds, click_prob):
    return np.flatnonzero(rng.random(n_rounds) < click_prob).astype(np.int64)


def best_of(fn, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rounds", type=int, default=2_000_000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    print(f"active backend: {kernels.BACKEND}")
    print(f"{'click_prob':>10} {'interval':>8} {'clicks':>9} "
          f"{'python (ms)':>12} {'active (ms)':>12} {'speedup':>8}")
    for click_prob in (0.001, 0.01, 0.1):
        clicks = make_train(rng, args.rounds, click_prob)
        for interval in (10, 100):
            f_a, s_a = kernels.pair_clicks(clicks, interval)
            f_p, s_p = py_impl.pair_clicks(clicks, interval)
            assert np.array_equal(f_a, f_p) and np.array_equal(s_a, s_p)
            t_py = best_of(py_impl.pair_clicks, (clicks, interval), args.repeat)
            t_ac = best_of(kernels.pair_clicks, (clicks, interval), args.repeat)
            print(f"{click_prob:>10} {interval:>8} {len(clicks):>9} "
                  f"{t_py * 1e3:>12.2f} {t_ac * 1e3:>12.2f} "
                  f"{t_py / t_ac:>8.1f}x")


if __name__ == "__main__":
    main()
