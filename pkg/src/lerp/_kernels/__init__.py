"""Kernel backend selection.

The compiled Cython kernels are preferred; the numpy fallback is used when
the extension is missing or when ``LERP_NO_EXTENSION`` is set (useful for
benchmarking both paths against each other).
"""

import os

from . import _pyref

if os.environ.get("LERP_NO_EXTENSION"):
    _impl = _pyref
    BACKEND = "numpy"
else:
    try:
        from . import _csr as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _pyref
        BACKEND = "numpy"

spmv = _impl.spmv
multi_source_bfs = _impl.multi_source_bfs


def backend_name() -> str:
    """Name of the kernel backend selected at import time."""
    return BACKEND


__all__ = ["spmv", "multi_source_bfs", "backend_name", "BACKEND"]
