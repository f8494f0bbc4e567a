"""Differentiable box crops and pastes via affine grid sampling.

Boxes are (x_ctr, y_ctr, w, h) normalized to [0, 1]. Crops bilinearly
resample the box region to a square patch; pastes place a decoded patch
back onto a full-resolution canvas (zeros outside the box).
"""

from __future__ import annotations

import warnings

import numpy as np
import torch
import torch.nn.functional as F

from ..envs.base import BBox


def _theta_crop(boxes: torch.Tensor) -> torch.Tensor:
    """[N, 4] boxes -> [N, 2, 3] affine maps from patch coords to image coords."""
    n = boxes.shape[0]
    theta = boxes.new_zeros((n, 2, 3))
    theta[:, 0, 0] = boxes[:, 2]
    theta[:, 1, 1] = boxes[:, 3]
    theta[:, 0, 2] = 2.0 * boxes[:, 0] - 1.0
    theta[:, 1, 2] = 2.0 * boxes[:, 1] - 1.0
    return theta


def _theta_paste(boxes: torch.Tensor) -> torch.Tensor:
    """Inverse maps: image coords to patch coords."""
    n = boxes.shape[0]
    theta = boxes.new_zeros((n, 2, 3))
    theta[:, 0, 0] = 1.0 / boxes[:, 2]
    theta[:, 1, 1] = 1.0 / boxes[:, 3]
    theta[:, 0, 2] = -(2.0 * boxes[:, 0] - 1.0) / boxes[:, 2]
    theta[:, 1, 2] = -(2.0 * boxes[:, 1] - 1.0) / boxes[:, 3]
    return theta


def crop_boxes(images: torch.Tensor, boxes: torch.Tensor, out_size: int,
               min_px: float = 1.0) -> torch.Tensor:
    """Crop one box per image: images [N, C, H, W], boxes [N, 4] ->
    patches [N, C, out_size, out_size]. Degenerate sizes are clamped to
    ``min_px`` pixels."""
    h, w = images.shape[-2:]
    boxes = torch.stack(
        [
            boxes[:, 0],
            boxes[:, 1],
            boxes[:, 2].clamp(min=min_px / w),
            boxes[:, 3].clamp(min=min_px / h),
        ],
        dim=1,
    )
    grid = F.affine_grid(_theta_crop(boxes), (boxes.shape[0], images.shape[1],
                                              out_size, out_size), align_corners=False)
    return F.grid_sample(images, grid, mode="bilinear", padding_mode="zeros",
                         align_corners=False)


def paste_patches(patches: torch.Tensor, boxes: torch.Tensor,
                  out_hw: tuple[int, int]) -> torch.Tensor:
    """Paste patches [N, C, P, P] into zero canvases [N, C, H, W] at their
    boxes [N, 4]."""
    grid = F.affine_grid(_theta_paste(boxes), (boxes.shape[0], patches.shape[1],
                                               out_hw[0], out_hw[1]), align_corners=False)
    return F.grid_sample(patches, grid, mode="bilinear", padding_mode="zeros",
                         align_corners=False)


def stn_crop(frame: np.ndarray | torch.Tensor, box: BBox, out_size: int) -> np.ndarray:
    """Crop a single normalized box from an HxWx3 frame to out_size^2.

    uint8 frames are scaled to [0, 1] floats. Boxes thinner than one pixel
    are clamped to one pixel and flagged with a warning.
    """
    if isinstance(frame, np.ndarray):
        arr = frame.astype(np.float32)
        if frame.dtype == np.uint8:
            arr = arr / 255.0
        image = torch.from_numpy(arr).permute(2, 0, 1)[None]
    else:
        image = frame[None] if frame.ndim == 3 else frame
    h, w = image.shape[-2:]
    if box.w * w < 1.0 or box.h * h < 1.0:
        warnings.warn(f"degenerate box {box}; clamping to 1 px", stacklevel=2)
    boxes = torch.tensor([[box.x_ctr, box.y_ctr, box.w, box.h]], dtype=image.dtype)
    patch = crop_boxes(image, boxes, out_size)
    return patch[0].permute(1, 2, 0).numpy()
