"""Pure numpy implementations of the hot kernels.

Every function here has a twin with the same name and signature in
``_kernels.pyx``. The integer parts (counter hashing, rank counting) agree
bit-for-bit between the two; the Box-Muller transform goes through libm in the
compiled version and numpy's ufuncs here, which can differ in the last ulp.
"""

from __future__ import annotations

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_TWO_PI = 6.283185307179586
_INV_2_53 = 1.0 / 9007199254740992.0


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def hash_counters(seed: int, start: int, n: int) -> np.ndarray:
    """SplitMix64 outputs for counters ``start + 1 .. start + n``."""
    with np.errstate(over="ignore"):
        ctr = np.arange(1, n + 1, dtype=np.uint64) + np.uint64(start)
        return _mix(np.uint64(seed) + ctr * GOLDEN)


def uniform_fill(seed: int, start: int, n: int) -> np.ndarray:
    """Uniform doubles on the open interval (0, 1)."""
    bits = hash_counters(seed, start, n) >> np.uint64(11)
    return (bits.astype(np.float64) + 0.5) * _INV_2_53


def normal_fill(seed: int, start: int, n: int) -> np.ndarray:
    """Standard normals; draw k consumes counters ``start+2k`` and ``start+2k+1``."""
    u = uniform_fill(seed, start, 2 * n)
    u1 = u[0::2]
    u2 = u[1::2]
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(_TWO_PI * u2)


def cholesky_lower(m: np.ndarray) -> tuple[np.ndarray, int]:
    """Lower Cholesky factor of a symmetric matrix.

    Returns ``(L, -1)`` on success or ``(partial L, j)`` where ``j`` is the
    first pivot that was not strictly positive.
    """
    a = np.array(m, dtype=np.float64, copy=True)
    d = a.shape[0]
    L = np.zeros_like(a)
    for j in range(d):
        pivot = a[j, j] - L[j, :j] @ L[j, :j]
        if not pivot > 0.0:
            return L, j
        ljj = np.sqrt(pivot)
        L[j, j] = ljj
        if j + 1 < d:
            L[j + 1 :, j] = (a[j + 1 :, j] - L[j + 1 :, :j] @ L[j, :j]) / ljj
    return L, -1


def auc_counts(pos: np.ndarray, neg: np.ndarray) -> tuple[int, int]:
    """Count pairs (i, j) with ``pos[i] > neg[j]`` and with ``pos[i] == neg[j]``."""
    neg_sorted = np.sort(np.asarray(neg, dtype=np.float64))
    pos = np.asarray(pos, dtype=np.float64)
    below = np.searchsorted(neg_sorted, pos, side="left")
    at_or_below = np.searchsorted(neg_sorted, pos, side="right")
    greater = int(below.sum())
    ties = int((at_or_below - below).sum())
    return greater, ties


def strict_below_counts(sorted_ref: np.ndarray, values: np.ndarray) -> np.ndarray:
    """For each value, the number of entries of ``sorted_ref`` strictly below it."""
    return np.searchsorted(sorted_ref, values, side="left").astype(np.int64)
