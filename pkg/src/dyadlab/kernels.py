"""Selects the compiled optimization kernels, falling back to pure numpy.

Set ``DYADLAB_PURE=1`` to force the numpy implementation (used by the
benchmark and the agreement tests).
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("DYADLAB_PURE"):
    _impl = _kernels_py
    USING_COMPILED = False
else:
    try:
        from . import _kernels_c as _impl  # type: ignore[attr-defined]

        USING_COMPILED = True
    except ImportError:
        _impl = _kernels_py
        USING_COMPILED = False

alternating_linear = _impl.alternating_linear
alternating_trilinear = _impl.alternating_trilinear
