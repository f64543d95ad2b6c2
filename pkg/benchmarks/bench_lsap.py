"""Compare the compiled LSAP kernel with the numpy fallback.

Usage: python3 benchmarks/bench_lsap.py [--sizes 10,50,100,200] [--repeat 5] [--seed 0]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from gedkit.lsap import KERNEL, solve_lsap
from gedkit.rng import make_rng


def best_time(C: np.ndarray, kernel: str, repeat: int) -> tuple[float, float]:
    best, cost = float("inf"), 0.0
    for _ in range(repeat):
        start = time.perf_counter()
        cost = solve_lsap(C, kernel=kernel).cost
        best = min(best, time.perf_counter() - start)
    return best, cost


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="10,50,100,200")
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    if KERNEL != "compiled":
        print("compiled kernel not built; only the python kernel is timed")
    rng = make_rng(args.seed)
    print(f"{'n':>5} {'m':>5} {'compiled_s':>12} {'python_s':>12} {'speedup':>8}")
    for n in (int(x) for x in args.sizes.split(",")):
        m = n + n // 2
        C = rng.integers(0, 100, size=(n, m)).astype(np.float64)
        t_py, c_py = best_time(C, "python", args.repeat)
        if KERNEL == "compiled":
            t_c, c_c = best_time(C, None, args.repeat)
            assert abs(c_c - c_py) <= 1e-9 * (1 + abs(c_py)), "kernels disagree"
            print(f"{n:>5} {m:>5} {t_c:>12.6f} {t_py:>12.6f} {t_py / t_c:>8.1f}")
        else:
            print(f"{n:>5} {m:>5} {'-':>12} {t_py:>12.6f} {'-':>8}")


if __name__ == "__main__":
    main()
