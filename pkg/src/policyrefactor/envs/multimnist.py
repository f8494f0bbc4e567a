"""Digit-sum scene generator: colored digits scattered on a 54x54 canvas.

The single-step task is to predict the sum of the digit values. Training
images carry 1-3 digits; the held-out regime uses 4.

RNG call order per image (one draw sequence, shared with replays):
  1. if the background uses a seed: ``bg_seed = rng.next_u32()``
  2. per digit, in order: value ``next_below(10)``, colour
     ``next_below(len(PALETTE))``, then placement attempts, each drawing
     x-center and y-center via ``next_below`` until the pairwise
     center-distance constraint is met.
"""

from __future__ import annotations

import math

import numpy as np

from .. import glyphs, kernels
from ..rng import Pcg32
from .backgrounds import BLACK, BackgroundSource
from .base import BBox, GroundTruthObject, KIND_DIGIT

FRAME_SIZE = 54
GLYPH_SCALE = 2
MIN_CENTER_DIST = 10  # pixels, euclidean
MAX_PLACEMENT_ATTEMPTS = 1000
TEXTURE_BLOCK = 6

PALETTE = (
    (230, 25, 25),
    (245, 130, 10),
    (255, 225, 25),
    (60, 180, 75),
    (70, 240, 240),
    (0, 130, 200),
    (145, 30, 180),
    (240, 50, 230),
    (255, 255, 255),
    (210, 245, 60),
)


class PlacementError(RuntimeError):
    """Raised when a digit cannot be placed without violating spacing."""


_ATLAS = glyphs.builtin_atlas()
_TIGHT = [glyphs.tight_bounds(g) for g in _ATLAS]


def mmnist_generate(
    n_digits: int,
    background: BackgroundSource = BLACK,
    rng: Pcg32 | None = None,
    atlas: list[np.ndarray] | None = None,
) -> tuple[np.ndarray, int, list[GroundTruthObject]]:
    """Render one scene; returns (frame, digit sum, ground-truth objects)."""
    if not 1 <= n_digits <= 9:
        raise ValueError(f"n_digits must be in [1, 9], got {n_digits}")
    rng = rng if rng is not None else Pcg32(0)
    atlas_masks = _ATLAS if atlas is None else atlas
    tight = _TIGHT if atlas is None else [glyphs.tight_bounds(g) for g in atlas_masks]

    canvas = np.zeros((FRAME_SIZE, FRAME_SIZE, 3), dtype=np.uint8)
    bg_seed = rng.next_u32() if background.uses_seed else 0
    background.fill(canvas, bg_seed, TEXTURE_BLOCK)

    gh = atlas_masks[0].shape[0] * GLYPH_SCALE
    gw = atlas_masks[0].shape[1] * GLYPH_SCALE
    cy_min, cy_max = gh // 2, FRAME_SIZE - (gh - gh // 2)
    cx_min, cx_max = gw // 2, FRAME_SIZE - (gw - gw // 2)

    total = 0
    gt: list[GroundTruthObject] = []
    centers: list[tuple[int, int]] = []
    for i in range(n_digits):
        value = rng.next_below(10)
        color = PALETTE[rng.next_below(len(PALETTE))]
        placed = False
        for _ in range(MAX_PLACEMENT_ATTEMPTS):
            cx = cx_min + rng.next_below(cx_max - cx_min + 1)
            cy = cy_min + rng.next_below(cy_max - cy_min + 1)
            if all((cx - ox) ** 2 + (cy - oy) ** 2 >= MIN_CENTER_DIST**2 for ox, oy in centers):
                placed = True
                break
        if not placed:
            raise PlacementError(
                f"could not place digit {i + 1}/{n_digits} after "
                f"{MAX_PLACEMENT_ATTEMPTS} attempts"
            )
        centers.append((cx, cy))
        top, left = cy - gh // 2, cx - gw // 2
        kernels.blit_mask(canvas, atlas_masks[value], top, left, GLYPH_SCALE, *color)

        t0, l0, th, tw = tight[value]
        gt.append(
            GroundTruthObject(
                box=BBox.from_pixels(
                    top + t0 * GLYPH_SCALE,
                    left + l0 * GLYPH_SCALE,
                    th * GLYPH_SCALE,
                    tw * GLYPH_SCALE,
                    FRAME_SIZE,
                    FRAME_SIZE,
                ),
                kind=KIND_DIGIT,
                entity_id=i,
                value=value,
            )
        )
        total += value

    return canvas, total, gt


def sample_digit_count(rng: Pcg32, low: int = 1, high: int = 3) -> int:
    """Uniform digit count for dataset generation (train default 1-3)."""
    return low + rng.next_below(high - low + 1)
