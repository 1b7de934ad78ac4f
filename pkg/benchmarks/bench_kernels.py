"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints one row per kernel with the best-of-N wall time for each backend and
the speedup of the compiled version.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from tsdr import _fallback

try:
    from tsdr import _kernels
except ImportError:  # extension not built
    _kernels = None


def cases(g: np.random.Generator):
    A = g.normal(size=(60, 60))
    spd = A @ A.T + 60 * np.eye(60)
    pos = g.normal(size=3000)
    neg = g.normal(size=9000)
    ref = np.sort(g.normal(size=20000))
    vals = g.normal(size=20000)
    return [
        ("hash_counters 1e6", lambda k: k.hash_counters(7, 0, 1_000_000)),
        ("uniform_fill 1e6", lambda k: k.uniform_fill(7, 0, 1_000_000)),
        ("normal_fill 1e6", lambda k: k.normal_fill(7, 0, 1_000_000)),
        ("cholesky_lower 60x60", lambda k: k.cholesky_lower(spd)),
        ("auc_counts 3k x 9k", lambda k: k.auc_counts(pos, neg)),
        ("strict_below_counts 2e4", lambda k: k.strict_below_counts(ref, vals)),
    ]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    g = np.random.default_rng(0)
    print(f"{'kernel':26s} {'python (ms)':>12s} {'cython (ms)':>12s} {'speedup':>8s}")
    for name, fn in cases(g):
        py = min(timeit.repeat(lambda: fn(_fallback), number=1, repeat=args.repeat)) * 1e3
        if _kernels is None:
            print(f"{name:26s} {py:12.2f} {'n/a':>12s} {'':>8s}")
            continue
        cy = min(timeit.repeat(lambda: fn(_kernels), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:26s} {py:12.2f} {cy:12.2f} {py / cy:7.1f}x")


if __name__ == "__main__":
    main()
