"""Anchor grid and anchor-relative box encoding.

A box (x_ctr, y_ctr, w, h) is regressed against its cell anchor
(x_a, y_a, w_a, h_a) as

    dx = (x_ctr - x_a) / w_a          dy = (y_ctr - y_a) / h_a
    dw = log(w / w_a)                 dh = log(h / h_a)

so zero offsets mean "exactly the anchor" and zero-mean Gaussian priors on
the offsets directly express "near the anchor". One anchor per cell,
centered on the cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import torch

from ..envs.base import BBox


@dataclass(frozen=True)
class BoxOffsets:
    dx: float
    dy: float
    dw: float
    dh: float

    def __post_init__(self):
        for v in (self.dx, self.dy, self.dw, self.dh):
            if not math.isfinite(v):
                raise ValueError(f"offsets must be finite, got {self}")

    def as_array(self) -> np.ndarray:
        return np.array([self.dx, self.dy, self.dw, self.dh], dtype=np.float64)


@dataclass(frozen=True)
class Anchor:
    x_a: float
    y_a: float
    w_a: float
    h_a: float

    def __post_init__(self):
        if self.w_a <= 0 or self.h_a <= 0:
            raise ValueError(f"anchor needs positive size, got {self}")


def encode_box(box: BBox, anchor: Anchor) -> BoxOffsets:
    if box.w <= 0 or box.h <= 0:
        raise ValueError(f"box needs positive size, got {box}")
    return BoxOffsets(
        dx=(box.x_ctr - anchor.x_a) / anchor.w_a,
        dy=(box.y_ctr - anchor.y_a) / anchor.h_a,
        dw=math.log(box.w / anchor.w_a),
        dh=math.log(box.h / anchor.h_a),
    )


def decode_box(offsets: BoxOffsets, anchor: Anchor) -> BBox:
    """Inverse of :func:`encode_box`; the result is clamped into the valid
    box domain (centers in [0, 1], sizes in (0, 1])."""
    x = offsets.dx * anchor.w_a + anchor.x_a
    y = offsets.dy * anchor.h_a + anchor.y_a
    w = math.exp(offsets.dw) * anchor.w_a
    h = math.exp(offsets.dh) * anchor.h_a
    return BBox(
        x_ctr=min(max(x, 0.0), 1.0),
        y_ctr=min(max(y, 0.0), 1.0),
        w=min(w, 1.0),
        h=min(h, 1.0),
    )


@dataclass(frozen=True)
class AnchorGrid:
    """One anchor per cell of an h x w grid tiling the unit square."""

    h: int
    w: int
    anchor_w: float
    anchor_h: float

    def __post_init__(self):
        if self.h < 1 or self.w < 1:
            raise ValueError("grid must be at least 1x1")
        if self.anchor_w <= 0 or self.anchor_h <= 0:
            raise ValueError("anchor size must be positive")

    @property
    def cells(self) -> int:
        return self.h * self.w

    def anchor(self, row: int, col: int) -> Anchor:
        return Anchor(
            x_a=(col + 0.5) / self.w,
            y_a=(row + 0.5) / self.h,
            w_a=self.anchor_w,
            h_a=self.anchor_h,
        )

    def as_tensor(self, dtype=torch.float32) -> torch.Tensor:
        """[cells, 4] anchors (x_a, y_a, w_a, h_a), row-major cell order."""
        ys, xs = np.meshgrid(np.arange(self.h), np.arange(self.w), indexing="ij")
        out = np.stack(
            [
                (xs.ravel() + 0.5) / self.w,
                (ys.ravel() + 0.5) / self.h,
                np.full(self.cells, self.anchor_w),
                np.full(self.cells, self.anchor_h),
            ],
            axis=1,
        )
        return torch.as_tensor(out, dtype=dtype)


def decode_boxes_tensor(offsets: torch.Tensor, anchors: torch.Tensor) -> torch.Tensor:
    """Batched differentiable decode: [..., 4] offsets -> [..., 4] boxes.

    No domain clamping here; out-of-frame boxes are legitimate during
    training (the spatial transformer zero-pads).
    """
    x = offsets[..., 0] * anchors[..., 2] + anchors[..., 0]
    y = offsets[..., 1] * anchors[..., 3] + anchors[..., 1]
    w = torch.exp(offsets[..., 2]) * anchors[..., 2]
    h = torch.exp(offsets[..., 3]) * anchors[..., 3]
    return torch.stack([x, y, w, h], dim=-1)


def encode_boxes_tensor(boxes: torch.Tensor, anchors: torch.Tensor) -> torch.Tensor:
    dx = (boxes[..., 0] - anchors[..., 0]) / anchors[..., 2]
    dy = (boxes[..., 1] - anchors[..., 1]) / anchors[..., 3]
    dw = torch.log(boxes[..., 2] / anchors[..., 2])
    dh = torch.log(boxes[..., 3] / anchors[..., 3])
    return torch.stack([dx, dy, dw, dh], dim=-1)
