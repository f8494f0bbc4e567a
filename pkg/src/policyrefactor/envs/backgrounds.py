"""Background sources for frame rendering.

Three modes:
  * ``black``    — constant zeros (the default).
  * ``textured`` — seeded integer value-noise tiles, identical across the
                   numpy/numba kernel paths and the accelerated engine.
  * ``images``   — user-supplied image directory; the episode background
                   seed indexes into the (sorted) file list.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import kernels

MODE_BLACK = "black"
MODE_TEXTURED = "textured"
MODE_IMAGES = "images"


@dataclass
class BackgroundSource:
    mode: str = MODE_BLACK
    image_dir: str | None = None
    block: int | None = None

    def __post_init__(self):
        if self.mode not in (MODE_BLACK, MODE_TEXTURED, MODE_IMAGES):
            raise ValueError(f"unknown background mode {self.mode!r}")
        if self.mode == MODE_IMAGES and not self.image_dir:
            raise ValueError("images mode needs image_dir")
        self._cache: dict[tuple[int, int], list[np.ndarray]] = {}

    @property
    def uses_seed(self) -> bool:
        return self.mode != MODE_BLACK

    def fill(self, canvas: np.ndarray, bg_seed: int, default_block: int) -> None:
        if self.mode == MODE_BLACK:
            canvas[:] = 0
        elif self.mode == MODE_TEXTURED:
            kernels.texture_fill(canvas, bg_seed, self.block or default_block)
        else:
            images = self._load_images(canvas.shape[0], canvas.shape[1])
            canvas[:] = images[bg_seed % len(images)]

    def _load_images(self, h: int, w: int) -> list[np.ndarray]:
        key = (h, w)
        if key not in self._cache:
            from PIL import Image

            paths = sorted(Path(self.image_dir).iterdir())
            paths = [p for p in paths if p.suffix.lower() in (".png", ".jpg", ".jpeg", ".bmp")]
            if not paths:
                raise ValueError(f"no images found in {self.image_dir}")
            images = []
            for p in paths:
                img = Image.open(p).convert("RGB").resize((w, h), Image.BILINEAR)
                images.append(np.asarray(img, dtype=np.uint8))
            self._cache[key] = images
        return self._cache[key]


BLACK = BackgroundSource(MODE_BLACK)
