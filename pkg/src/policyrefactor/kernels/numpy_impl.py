"""Pure-numpy rasterization kernels (reference path).

All arithmetic is integer-only so that the numba twin in
``numba_impl`` and the accelerated rollout engine can reproduce frames
byte-for-byte. Hash math is done in uint64 with explicit 32-bit masking;
values never exceed 2**64 because every operand is < 2**32.
"""

from __future__ import annotations

import numpy as np

_M32 = np.uint64(0xFFFFFFFF)


def _hash32(x: np.ndarray) -> np.ndarray:
    """lowbias32 integer mixer on uint64 arrays masked to 32 bits."""
    x = x & _M32
    x ^= x >> np.uint64(16)
    x = (x * np.uint64(0x7FEB352D)) & _M32
    x ^= x >> np.uint64(15)
    x = (x * np.uint64(0x846CA68B)) & _M32
    x ^= x >> np.uint64(16)
    return x


def texture_fill(canvas: np.ndarray, seed: int, block: int) -> None:
    """Fill an HxWx3 uint8 canvas with seeded value-noise colour tiles plus
    per-pixel brightness jitter."""
    h, w, _ = canvas.shape
    seed64 = np.uint64(seed & 0xFFFFFFFF)
    block_hash = _hash32(np.array(seed64, dtype=np.uint64))

    ys = np.arange(h, dtype=np.uint64)[:, None]
    xs = np.arange(w, dtype=np.uint64)[None, :]
    bys = ys // np.uint64(block)
    bxs = xs // np.uint64(block)

    key = (bxs * np.uint64(0x9E3779B1) + bys * np.uint64(0x85EBCA77)) & _M32
    cell = _hash32(block_hash ^ key)
    r = np.uint64(40) + (cell & np.uint64(0x7F))
    g = np.uint64(40) + ((cell >> np.uint64(8)) & np.uint64(0x7F))
    b = np.uint64(40) + ((cell >> np.uint64(16)) & np.uint64(0x7F))

    pkey = (xs * np.uint64(0xC2B2AE35) + ys * np.uint64(0x27D4EB2F)) & _M32
    jitter = _hash32(block_hash ^ pkey ^ np.uint64(0x5EED5EED))
    d = (jitter & np.uint64(31)).astype(np.int64) - 16

    for channel, base in enumerate(np.broadcast_arrays(r, g, b)):
        v = base.astype(np.int64) + d
        canvas[:, :, channel] = np.clip(v, 0, 255).astype(np.uint8)


def blit_mask(canvas: np.ndarray, mask: np.ndarray, top: int, left: int,
              scale: int, r: int, g: int, b: int) -> None:
    """Paint lit mask pixels onto the canvas at an integer position and
    scale. The scaled sprite must lie fully inside the canvas."""
    big = np.repeat(np.repeat(mask, scale, axis=0), scale, axis=1) > 0
    mh, mw = big.shape
    region = canvas[top : top + mh, left : left + mw]
    region[big] = np.array([r, g, b], dtype=np.uint8)


def fill_rect(canvas: np.ndarray, top: int, left: int, h: int, w: int,
              r: int, g: int, b: int) -> None:
    canvas[top : top + h, left : left + w] = np.array([r, g, b], dtype=np.uint8)
