"""Compare the numba and numpy kernel backends.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5] [--quick]

Reports the best-of-``repeat`` wall time per call for each kernel and the
numpy/numba ratio. JIT compilation is excluded by a warm-up call.
"""

import argparse
import sys
import timeit

import numpy as np

from welfare_diff.kernels import codes, jit_backend, numpy_backend
from welfare_diff.montecarlo import dgp, generate


def cases(quick):
    rng = np.random.default_rng(0)
    sizes = (500, 5000) if quick else (500, 5000, 50_000)
    B = 199 if quick else 399
    for n in sizes:
        data = generate(dgp("IA", 0.5, 0.5, n), rng)
        x1, x2, m = data.x1, data.x2, data.m
        t1, t2 = data.tail1.size, data.tail2.size
        for name, code, p in (("gini", codes.GINI, 0.0), ("lorenz(0.4)", codes.LORENZ, 0.4),
                              ("gini-pos-part", codes.GINI_POS, 0.0)):
            yield f"influence {name} n={n}", lambda k, x=x1, c=code, q=p: k.influence(x, c, q)
            yield f"delta_stats {name} n={n}", lambda k, c=code, q=p: k.delta_stats(x1, x2, m, c, q)
            if n > 5000:
                continue
            idx = rng.integers(0, n, size=(B, n))
            ip = rng.integers(0, m, size=(B, m))
            i1 = rng.integers(0, t1, size=(B, t1))
            i2 = rng.integers(0, t2, size=(B, t2))
            yield (f"boot_single {name} n={n} B={B}",
                   lambda k, c=code, q=p, ix=idx: k.boot_single(x1, ix, c, q, False))
            yield (f"boot_overlap {name} n={n} B={B}",
                   lambda k, c=code, q=p, a=ip, b=i1, d=i2: k.boot_overlap(x1, x2, m, a, b, d, c, q, False))


def best(fn, repeat):
    fn()  # warm-up (JIT compile, caches)
    timer = timeit.Timer(fn)
    number, _ = timer.autorange()
    return min(timer.repeat(repeat, number)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--quick", action="store_true", help="smaller sizes and B")
    args = ap.parse_args(argv)
    if jit_backend is None:
        print("numba backend unavailable (numba missing or WELFARE_DIFF_NO_JIT set)", file=sys.stderr)
        return 1
    print(f"{'kernel':<44}{'numba [ms]':>12}{'numpy [ms]':>12}{'ratio':>8}")
    for label, call in cases(args.quick):
        tj = best(lambda: call(jit_backend), args.repeat)
        tn = best(lambda: call(numpy_backend), args.repeat)
        print(f"{label:<44}{tj * 1e3:>12.3f}{tn * 1e3:>12.3f}{tn / tj:>8.1f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
