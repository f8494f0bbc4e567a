"""Numba-compiled twins of the numpy rasterization kernels.

Same integer arithmetic, explicit loops. Output must be byte-identical to
``numpy_impl``; the parity tests enforce this.
"""

from __future__ import annotations

import numba
import numpy as np

_M32 = np.uint64(0xFFFFFFFF)


@numba.njit(cache=True, inline="always")
def _hash32(x):
    x = x & _M32
    x ^= x >> np.uint64(16)
    x = (x * np.uint64(0x7FEB352D)) & _M32
    x ^= x >> np.uint64(15)
    x = (x * np.uint64(0x846CA68B)) & _M32
    x ^= x >> np.uint64(16)
    return x


@numba.njit(cache=True)
def texture_fill(canvas, seed, block):
    h, w, _ = canvas.shape
    block_hash = _hash32(np.uint64(seed & 0xFFFFFFFF))
    for y in range(h):
        by = np.uint64(y // block)
        for x in range(w):
            bx = np.uint64(x // block)
            key = (bx * np.uint64(0x9E3779B1) + by * np.uint64(0x85EBCA77)) & _M32
            cell = _hash32(block_hash ^ key)
            pkey = (np.uint64(x) * np.uint64(0xC2B2AE35)
                    + np.uint64(y) * np.uint64(0x27D4EB2F)) & _M32
            jitter = _hash32(block_hash ^ pkey ^ np.uint64(0x5EED5EED))
            d = np.int64(jitter & np.uint64(31)) - 16
            r = np.int64(40 + (cell & np.uint64(0x7F))) + d
            g = np.int64(40 + ((cell >> np.uint64(8)) & np.uint64(0x7F))) + d
            b = np.int64(40 + ((cell >> np.uint64(16)) & np.uint64(0x7F))) + d
            canvas[y, x, 0] = np.uint8(min(max(r, 0), 255))
            canvas[y, x, 1] = np.uint8(min(max(g, 0), 255))
            canvas[y, x, 2] = np.uint8(min(max(b, 0), 255))


@numba.njit(cache=True)
def blit_mask(canvas, mask, top, left, scale, r, g, b):
    mh, mw = mask.shape
    for gy in range(mh):
        for gx in range(mw):
            if mask[gy, gx]:
                y0 = top + gy * scale
                x0 = left + gx * scale
                for y in range(y0, y0 + scale):
                    for x in range(x0, x0 + scale):
                        canvas[y, x, 0] = r
                        canvas[y, x, 1] = g
                        canvas[y, x, 2] = b


@numba.njit(cache=True)
def fill_rect(canvas, top, left, h, w, r, g, b):
    for y in range(top, top + h):
        for x in range(left, left + w):
            canvas[y, x, 0] = r
            canvas[y, x, 1] = g
            canvas[y, x, 2] = b
