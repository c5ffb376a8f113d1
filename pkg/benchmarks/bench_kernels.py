"""Compare the numba and numpy pre-image kernels.

    python3 benchmarks/bench_kernels.py [--states 1000 10000 100000] [--repeat 5]

Random transition tables with a fixed out-degree; each kernel runs on both
backends (numba after one warm-up call) and the results are checked equal.
"""

import argparse
import timeit

import numpy as np

from atlkf import _kernels


def table(n_states, n_cols, degree, seed):
    rng = np.random.default_rng(seed)
    src = np.repeat(np.arange(n_states, dtype=np.int64), n_cols * degree)
    col = np.tile(np.repeat(np.arange(n_cols, dtype=np.int64), degree), n_states)
    dst = rng.integers(0, n_states, size=src.size, dtype=np.int64)
    allowed = rng.random((n_states, n_cols)) < 0.7
    allowed[np.arange(n_states), rng.integers(0, n_cols, n_states)] = True
    target = rng.random(n_states) < 0.5
    return src, col, dst, allowed, target


def calls(impl, src, col, dst, allowed, target):
    n = allowed.shape[0]
    return {
        "pre_forced": lambda: impl.pre_forced(src, col, dst, allowed, target),
        "pre_exists": lambda: impl.pre_exists(src, col, dst, allowed, target),
        "pre_exists_ac": lambda: impl.pre_exists_ac(src, col, dst, allowed, target),
        "post": lambda: impl.post(src, dst, target, n),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--states", type=int, nargs="+", default=[1_000, 10_000, 100_000])
    parser.add_argument("--cols", type=int, default=4)
    parser.add_argument("--degree", type=int, default=2)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    if _kernels.numba_impl is None:
        print("numba is not installed; nothing to compare")
        return
    print(f"{'states':>8} {'kernel':<14} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}")
    for n in args.states:
        data = table(n, args.cols, args.degree, seed=n)
        fast = calls(_kernels.numba_impl, *data)
        slow = calls(_kernels.numpy_impl, *data)
        for name in fast:
            a, b = fast[name](), slow[name]()  # warm-up, compiles numba
            assert np.array_equal(a, b), name
            t_np = min(timeit.repeat(slow[name], number=1, repeat=args.repeat)) * 1e3
            t_nb = min(timeit.repeat(fast[name], number=1, repeat=args.repeat)) * 1e3
            print(f"{n:>8} {name:<14} {t_np:>10.3f} {t_nb:>10.3f} {t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
