"""Annealing-kernel selection: compiled extension if available, numpy fallback.

Set ``BHTN_PURE_PYTHON=1`` to force the fallback (used by the benchmark and
the parity tests).
"""

from __future__ import annotations

import os

if os.environ.get("BHTN_PURE_PYTHON"):
    from . import _sa_py as _impl

    KERNEL_BACKEND = "python"
else:
    try:
        from . import _sa_cy as _impl  # type: ignore[attr-defined]

        KERNEL_BACKEND = "cython"
    except ImportError:
        from . import _sa_py as _impl

        KERNEL_BACKEND = "python"

anneal = _impl.anneal


def kernel_backend() -> str:
    """Name of the active sweep kernel: 'cython' or 'python'."""
    return KERNEL_BACKEND
