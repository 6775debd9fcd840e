"""Time the numba kernels against their numpy twins on realistic inputs.

    python benchmarks/bench_kernels.py [--repeat 5] [--level 4232] [--p 23] [--n 2]

Both variants are called directly, so the MTLAMBDA_DISABLE_NUMBA flag does
not matter here. Outputs are compared before timing.
"""

import argparse
import time

import numpy as np

from mtlambda import kernels as K
from mtlambda._jit import HAVE_NUMBA
from mtlambda.linalg import MODULAR_PRIMES
from mtlambda.modsym import build_p1

Q = MODULAR_PRIMES[0]


def best_of(fn, repeat):
    fn()  # warm-up (and JIT compilation)
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def cases(args, rng):
    p1 = build_p1(args.level)
    den = args.p ** (args.n + 1)
    nums = np.array([a for a in range(1, den) if a % args.p], dtype=np.int64)
    values = rng.integers(-1000, 1000, len(p1)).astype(np.int64)
    yield ("cf_path_values", f"N={args.level}, {nums.size} cusps",
           lambda: K.cf_path_values_nb(nums, np.int64(den), np.int64(args.level), p1.table, values),
           lambda: K.cf_path_values_np(nums, den, args.level, p1.table, values))

    W = rng.integers(0, Q, (len(p1), 8)).astype(np.int64)
    idx = rng.integers(0, len(p1), (len(p1), 40)).astype(np.int64)
    yield ("gather_sum_mod", f"{idx.shape[0]}x{idx.shape[1]} gathers",
           lambda: K.gather_sum_mod_nb(idx, W, np.int64(Q)),
           lambda: K.gather_sum_mod_np(idx, W, Q))

    A = rng.integers(0, Q, (300, 300)).astype(np.int64)
    B = rng.integers(0, Q, (300, 40)).astype(np.int64)
    yield ("matmul_mod", "300x300 @ 300x40",
           lambda: K.matmul_mod_nb(A, B, np.int64(Q)),
           lambda: K.matmul_mod_np(A, B, Q))

    R = rng.integers(0, Q, (120, 160)).astype(np.int64)
    yield ("rref_mod", "120x160",
           lambda: K._rref_mod_nb(R, np.int64(Q)),
           lambda: K._rref_mod_np(R, Q))

    L = args.p ** args.n
    base, top = args.p ** 12, args.p ** 8
    limbs = np.stack([rng.integers(0, base, L), rng.integers(0, base, L), rng.integers(0, top, L)], axis=1)
    limbs = limbs.astype(np.int64)
    yield ("binomial_transform", f"{L} coefficients, 3 limbs",
           lambda: K.binomial_transform_nb(limbs, np.int64(base), np.int64(top)),
           lambda: K.binomial_transform_np(limbs, base, top))


def _same(a, b):
    if isinstance(a, tuple):
        return all(np.array_equal(x, y) for x, y in zip(a, b))
    return np.array_equal(a, b)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--level", type=int, default=4232)
    ap.add_argument("--p", type=int, default=23)
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if not HAVE_NUMBA:
        print("numba is not installed; the *_nb kernels run as plain Python")
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<20} {'input':<28} {'numba (s)':>10} {'numpy (s)':>10} {'speed-up':>9}")
    for name, desc, nb, np_ in cases(args, rng):
        if not _same(nb(), np_()):
            raise SystemExit(f"{name}: numba and numpy outputs differ")
        t_nb, t_np = best_of(nb, args.repeat), best_of(np_, args.repeat)
        print(f"{name:<20} {desc:<28} {t_nb:>10.4f} {t_np:>10.4f} {t_np / t_nb:>8.1f}x")


if __name__ == "__main__":
    main()
