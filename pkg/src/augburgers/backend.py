"""Selects the right-hand-side kernel implementation at import time.

The compiled extension is preferred when present; the NumPy fallback is
numerically equivalent (same operation order) but slower.  Set
``AUGBURGERS_BACKEND=python`` or ``=cython`` to force a choice.
"""

from __future__ import annotations

import os

_requested = os.environ.get("AUGBURGERS_BACKEND", "auto").lower()

if _requested not in ("auto", "cython", "python"):
    raise ImportError(
        f"AUGBURGERS_BACKEND must be 'auto', 'cython' or 'python', got {_requested!r}"
    )

if _requested == "python":
    from . import _kernels_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        if _requested == "cython":
            raise ImportError(
                "AUGBURGERS_BACKEND=cython but the compiled extension "
                "augburgers._kernels is not available; build it or use "
                "AUGBURGERS_BACKEND=python"
            ) from None
        from . import _kernels_py as _impl

        BACKEND = "python"

rhs_kernel = _impl.rhs_kernel
