"""Select the float64 kernel backend at import time.

The compiled extension (``ujssp._kernels``) is preferred; the pure
Python twin (``ujssp._kernels_py``) is used when the extension is not
built.  Set ``UJSSP_BACKEND=python`` or ``UJSSP_BACKEND=compiled`` to
force one side (the latter raises if the extension is missing).  Both
backends implement the same contracts and return identical results;
``benchmarks/compare_backends.py`` measures the speed difference.
"""

from __future__ import annotations

import os

_forced = os.environ.get("UJSSP_BACKEND", "auto").lower()
if _forced not in ("auto", "python", "compiled"):
    raise ValueError(f"UJSSP_BACKEND must be auto|python|compiled, got {_forced}")

if _forced == "python":
    from . import _kernels_py as _impl
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
        BACKEND = "compiled"
    except ImportError:
        if _forced == "compiled":
            raise
        from . import _kernels_py as _impl
        BACKEND = "python"


def impl():
    """The active kernel module."""
    return _impl
