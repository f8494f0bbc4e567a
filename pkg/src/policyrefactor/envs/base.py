"""Shared environment types: normalized boxes, ground-truth annotations,
and step results."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

KIND_DIGIT = "digit"
KIND_PLAYER = "player"
KIND_DOT = "dot"
KIND_FALLING = "falling_digit"
KIND_TARGET = "target_digit"

_KINDS_WITH_VALUE = (KIND_DIGIT, KIND_FALLING, KIND_TARGET)


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box, center/size normalized to [0, 1] of the frame."""

    x_ctr: float
    y_ctr: float
    w: float
    h: float

    def __post_init__(self):
        if not (0.0 <= self.x_ctr <= 1.0 and 0.0 <= self.y_ctr <= 1.0):
            raise ValueError(f"box center out of range: ({self.x_ctr}, {self.y_ctr})")
        if not (0.0 < self.w <= 1.0 and 0.0 < self.h <= 1.0):
            raise ValueError(f"box size out of range: ({self.w}, {self.h})")

    @staticmethod
    def from_pixels(top: int, left: int, h: int, w: int, img_h: int, img_w: int) -> "BBox":
        return BBox(
            x_ctr=(left + w / 2.0) / img_w,
            y_ctr=(top + h / 2.0) / img_h,
            w=w / img_w,
            h=h / img_h,
        )

    def as_array(self) -> np.ndarray:
        return np.array([self.x_ctr, self.y_ctr, self.w, self.h], dtype=np.float64)

    def corners(self) -> tuple[float, float, float, float]:
        """(x0, y0, x1, y1)."""
        return (
            self.x_ctr - self.w / 2.0,
            self.y_ctr - self.h / 2.0,
            self.x_ctr + self.w / 2.0,
            self.y_ctr + self.h / 2.0,
        )


def box_iou(a: BBox, b: BBox) -> float:
    ax0, ay0, ax1, ay1 = a.corners()
    bx0, by0, bx1, by1 = b.corners()
    iw = min(ax1, bx1) - max(ax0, bx0)
    ih = min(ay1, by1) - max(ay0, by0)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    union = a.w * a.h + b.w * b.h - inter
    return inter / union


@dataclass(frozen=True)
class GroundTruthObject:
    box: BBox
    kind: str
    entity_id: int
    value: int | None = None

    def __post_init__(self):
        if self.kind in _KINDS_WITH_VALUE:
            if self.value is None or not 0 <= self.value <= 9:
                raise ValueError(f"{self.kind} needs a digit value 0-9, got {self.value}")
        elif self.value is not None:
            raise ValueError(f"{self.kind} carries no value")


@dataclass
class StepResult:
    frame: np.ndarray | None
    reward: float
    done: bool
    gt: list[GroundTruthObject] = field(default_factory=list)
