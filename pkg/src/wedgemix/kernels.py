"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
fallback takes over. Set ``WEDGEMIX_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _fallback

if os.environ.get("WEDGEMIX_PURE_PYTHON", "") not in ("", "0"):
    _impl = _fallback
else:
    try:
        from . import _core as _impl
    except ImportError:  # extension not built
        _impl = _fallback

BACKEND = _impl.BACKEND

shear_rows_bytes = _impl.shear_rows_bytes
shear_cols_bytes = _impl.shear_cols_bytes
shear_rows_packed = _impl.shear_rows_packed
transpose_packed = _impl.transpose_packed
packed_level_scan = _impl.packed_level_scan


def compiled():
    """Return the compiled module, or None when it is unavailable."""
    try:
        from . import _core
    except ImportError:
        return None
    return _core
