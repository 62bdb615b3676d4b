"""Kernel backend selection.

The compiled extension is used when importable; set
``EFDPHANTOMS_PURE_PYTHON=1`` to force the numpy fallback.
"""
import os

from . import _pykernels

BACKEND = "python"
if os.environ.get("EFDPHANTOMS_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels
else:
    _impl = _pykernels

trace_boundary = _impl.trace_boundary
scanline_fill = _impl.scanline_fill
dtw_cost = _impl.dtw_cost
convex_hull = _impl.convex_hull

__all__ = ["BACKEND", "trace_boundary", "scanline_fill", "dtw_cost", "convex_hull"]
