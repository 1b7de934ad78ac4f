"""Dense linear algebra and seeded random numbers.

Least squares is solved through the normal equations with a Cholesky factor.
When the Gram matrix is (numerically) singular a small Tikhonov jitter
``1e-10 * trace(G) / p`` is added instead of raising, because one-hot expanded
tables routinely contain collinear columns.

Random numbers come from :class:`Rng`, a counter-based SplitMix64 stream:
draw ``k`` of a generator with seed ``s`` is a pure function of ``(s, k)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from . import _backend

JITTER_SCALE = 1e-10
RANK_TOL = 1e-10
SYMMETRY_TOL = 1e-12

_MASK64 = (1 << 64) - 1


class LinalgError(ValueError):
    """Base class for linear algebra failures."""


class DimensionError(LinalgError):
    """Operand shapes are incompatible."""


class NotPositiveDefiniteError(LinalgError):
    """Cholesky hit a non-positive pivot."""

    def __init__(self, pivot: int, value: float | None = None):
        self.pivot = pivot
        self.value = value
        msg = f"matrix is not positive definite: pivot {pivot} is not > 0"
        if value is not None:
            msg += f" (value {value:.3g})"
        super().__init__(msg)


class IdentificationError(LinalgError):
    """Fewer instruments than regressors."""


# ---------------------------------------------------------------------------
# Random numbers
# ---------------------------------------------------------------------------


def _splitmix(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, *keys: int) -> int:
    """Hash a base seed and integer keys into a new 64-bit seed."""
    z = _splitmix(int(seed) & _MASK64)
    for k in keys:
        z = _splitmix(z ^ (int(k) & _MASK64))
    return z


@dataclass
class Rng:
    """Counter-based random stream.

    ``seed`` fixes the stream; ``counter`` is the number of 64-bit words
    consumed so far. Normals use Box-Muller (cosine branch only), two words
    per draw.
    """

    seed: int
    counter: int = 0

    def __post_init__(self) -> None:
        self.seed = int(self.seed) & _MASK64

    def _take(self, words: int) -> int:
        start = self.counter
        self.counter += words
        return start

    def uniform(self, size: int | tuple[int, ...] = 1) -> np.ndarray:
        n = int(np.prod(size))
        out = _backend.uniform_fill(self.seed, self._take(n), n)
        return out.reshape(size)

    def normal(self, size: int | tuple[int, ...] = 1) -> np.ndarray:
        n = int(np.prod(size))
        out = _backend.normal_fill(self.seed, self._take(2 * n), n)
        return out.reshape(size)

    def integers(self, high: int, size: int) -> np.ndarray:
        """Uniform integers in ``[0, high)``."""
        u = self.uniform(size)
        return np.minimum((u * high).astype(np.int64), high - 1)

    def permutation(self, n: int) -> np.ndarray:
        return np.argsort(self.uniform(n), kind="stable")

    def spawn(self, *keys: int) -> "Rng":
        """Independent child stream keyed by ``keys``; does not advance ``self``."""
        return Rng(derive_seed(self.seed, *keys))


# ---------------------------------------------------------------------------
# Factorizations and solvers
# ---------------------------------------------------------------------------


def _as_2d(a, name: str) -> np.ndarray:
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 1-D or 2-D, got shape {arr.shape}")
    return arr


def cholesky(m) -> np.ndarray:
    """Lower-triangular ``L`` with ``L @ L.T == m``.

    The input is symmetrized as ``(m + m.T) / 2`` after checking it is
    symmetric to within 1e-12 relative. Raises
    :class:`NotPositiveDefiniteError` carrying the failing pivot index.
    """
    a = np.asarray(m, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"cholesky needs a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise LinalgError("cholesky input contains non-finite values")
    scale = max(np.abs(a).max(initial=0.0), np.finfo(float).tiny)
    if np.abs(a - a.T).max(initial=0.0) > SYMMETRY_TOL * scale:
        raise LinalgError("cholesky input is not symmetric")
    a = 0.5 * (a + a.T)
    L, fail = _backend.cholesky_lower(a)
    if fail >= 0:
        raise NotPositiveDefiniteError(int(fail))
    return L


def _cho_solve(L: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    w = solve_triangular(L, rhs, lower=True, check_finite=False)
    return solve_triangular(L.T, w, lower=False, check_finite=False)


def _well_conditioned(L: np.ndarray, gram: np.ndarray) -> bool:
    diag = np.diag(gram)
    pivots = np.diag(L) ** 2
    return bool(np.all(pivots > RANK_TOL * diag))


def solve_normal_equations(gram, rhs) -> tuple[np.ndarray, float]:
    """Solve ``gram @ B = rhs`` for a symmetric PSD ``gram``.

    Returns ``(B, jitter)`` where ``jitter`` is the ridge added to the
    diagonal, 0.0 when the system was solved as given.
    """
    G = np.asarray(gram, dtype=np.float64)
    R = np.asarray(rhs, dtype=np.float64)
    p = G.shape[0]
    G = 0.5 * (G + G.T)
    L, fail = _backend.cholesky_lower(G)
    if fail < 0 and _well_conditioned(L, G):
        return _cho_solve(L, R), 0.0
    trace = float(np.trace(G))
    lam = JITTER_SCALE * trace / p if trace > 0 else JITTER_SCALE
    for _ in range(20):
        L, fail = _backend.cholesky_lower(G + lam * np.eye(p))
        if fail < 0:
            return _cho_solve(L, R), lam
        lam *= 10.0
    raise NotPositiveDefiniteError(int(fail))  # pragma: no cover


def solve_least_squares(design, targets) -> np.ndarray:
    """Coefficients ``B`` minimizing ``||design @ B - targets||_F``.

    A 1-D ``targets`` gives a 1-D result.
    """
    X = _as_2d(design, "design")
    Y = np.asarray(targets, dtype=np.float64)
    flat = Y.ndim == 1
    Y = _as_2d(Y, "targets")
    if X.shape[0] != Y.shape[0]:
        raise DimensionError(
            f"design has {X.shape[0]} rows but targets has {Y.shape[0]}"
        )
    if X.shape[0] < 1 or X.shape[1] < 1 or Y.shape[1] < 1:
        raise DimensionError("least squares needs n >= 1, p >= 1, q >= 1")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
        raise LinalgError("least squares input contains non-finite values")
    B, _ = solve_normal_equations(X.T @ X, X.T @ Y)
    return B[:, 0] if flat else B


def project_2sls(Z, X, Y) -> np.ndarray:
    """Two-stage least squares: regress Y on the projection of X onto span(Z)."""
    Z = _as_2d(Z, "Z")
    X = _as_2d(X, "X")
    y = np.asarray(Y, dtype=np.float64)
    flat = y.ndim == 1
    y = _as_2d(y, "Y")
    n, k = Z.shape
    p = X.shape[1]
    if X.shape[0] != n or y.shape[0] != n:
        raise DimensionError("Z, X and Y must have the same number of rows")
    if k < p:
        raise IdentificationError(
            f"under-identified: {k} instruments for {p} regressors"
        )
    if n <= k:
        raise DimensionError(f"need more rows ({n}) than instruments ({k})")
    X_hat = Z @ solve_least_squares(Z, X)
    beta = solve_least_squares(X_hat, y)
    return beta[:, 0] if flat else beta


def sample_mvn(mean, cov, n: int, rng: Rng) -> np.ndarray:
    """``n`` rows from N(mean, cov), generated as ``mean + L g``."""
    mu = np.atleast_1d(np.asarray(mean, dtype=np.float64))
    C = np.asarray(cov, dtype=np.float64)
    d = mu.shape[0]
    if C.shape != (d, d):
        raise DimensionError(f"cov shape {C.shape} does not match mean length {d}")
    L = cholesky(C)
    g = rng.normal((n, d))
    return mu + g @ L.T
