"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
fallback is. Set ``GIBBSPOST_BACKEND=python`` to force the fallback.
"""
from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("GIBBSPOST_BACKEND", "").lower() != "python":
    try:
        from . import _kernels as _compiled  # type: ignore[attr-defined]
    except ImportError:
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"

splitmix_raw = _impl.splitmix_raw
splitmix_uniform = _impl.splitmix_uniform
chain_batch = _impl.chain_batch
cocycle_lognorms = _impl.cocycle_lognorms

__all__ = [
    "BACKEND",
    "splitmix_raw",
    "splitmix_uniform",
    "chain_batch",
    "cocycle_lognorms",
]
