"""Rasterization kernels with a numba fast path and a pure-numpy fallback.

The active path is chosen once at import time: set
``POLICYREFACTOR_DISABLE_NUMBA=1`` to force the numpy implementation
(e.g. on platforms without a working numba). Both paths produce
byte-identical output; ``benchmarks/bench_kernels.py`` compares their
throughput.
"""

from __future__ import annotations

import os

from . import numpy_impl

_DISABLED = os.environ.get("POLICYREFACTOR_DISABLE_NUMBA", "") not in ("", "0")

if _DISABLED:
    numba_impl = None
else:
    try:
        import importlib

        numba_impl = importlib.import_module(f"{__name__}.numba_impl")
    except ImportError:
        numba_impl = None

_active = numba_impl if numba_impl is not None else numpy_impl

texture_fill = _active.texture_fill
blit_mask = _active.blit_mask
fill_rect = _active.fill_rect

USING_NUMBA = _active is not numpy_impl
