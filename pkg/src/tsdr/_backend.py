"""Kernel backend selection.

The compiled ``_kernels`` extension is used when it was built; otherwise the
numpy versions in ``_fallback`` are used. Set ``TSDR_BACKEND=python`` to force
the fallback even when the extension is present.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _fallback


def _select() -> tuple[ModuleType, str]:
    if os.environ.get("TSDR_BACKEND", "").lower() == "python":
        return _fallback, "python"
    try:
        from . import _kernels  # type: ignore[attr-defined]
    except ImportError:
        return _fallback, "python"
    return _kernels, "cython"


kernels, BACKEND = _select()
HAS_COMPILED = BACKEND == "cython"

hash_counters = kernels.hash_counters
uniform_fill = kernels.uniform_fill
normal_fill = kernels.normal_fill
cholesky_lower = kernels.cholesky_lower
auc_counts = kernels.auc_counts
strict_below_counts = kernels.strict_below_counts

__all__ = [
    "BACKEND",
    "HAS_COMPILED",
    "auc_counts",
    "cholesky_lower",
    "hash_counters",
    "normal_fill",
    "strict_below_counts",
    "uniform_fill",
]
