"""Built-in digit glyph atlas and its binary export format.

The games render digits from ten fixed bitmaps (one per digit value), so
frames are reproducible without any external dataset. The atlas can be
exported to a small binary file (magic ``GLYA``) that the accelerated
rollout engine loads to guarantee both engines blit identical sprites.

An optional loader swaps in glyphs from user-supplied MNIST-format idx
files (one fixed image instance per digit class).
"""

from __future__ import annotations

import struct
import zlib

import numpy as np

GLYPH_MAGIC = b"GLYA"
GLYPH_VERSION = 1

# Classic 5x7 dot-matrix digits. Row-major, 1 = lit.
_DIGIT_ROWS = [
    ["01110", "10001", "10011", "10101", "11001", "10001", "01110"],  # 0
    ["00100", "01100", "00100", "00100", "00100", "00100", "01110"],  # 1
    ["01110", "10001", "00001", "00010", "00100", "01000", "11111"],  # 2
    ["11111", "00010", "00100", "00010", "00001", "10001", "01110"],  # 3
    ["00010", "00110", "01010", "10010", "11111", "00010", "00010"],  # 4
    ["11111", "10000", "11110", "00001", "00001", "10001", "01110"],  # 5
    ["00110", "01000", "10000", "11110", "10001", "10001", "01110"],  # 6
    ["11111", "00001", "00010", "00100", "01000", "01000", "01000"],  # 7
    ["01110", "10001", "10001", "01110", "10001", "10001", "01110"],  # 8
    ["01110", "10001", "10001", "01111", "00001", "00010", "01100"],  # 9
]


def builtin_atlas() -> list[np.ndarray]:
    """The ten built-in 5x7 digit bitmaps as uint8 arrays of 0/1."""
    atlas = []
    for rows in _DIGIT_ROWS:
        bitmap = np.array([[int(c) for c in row] for row in rows], dtype=np.uint8)
        atlas.append(bitmap)
    return atlas


def scale_glyph(glyph: np.ndarray, scale: int) -> np.ndarray:
    """Nearest-neighbour integer upscale (the only scaling engines may use)."""
    if scale < 1:
        raise ValueError(f"scale must be >= 1, got {scale}")
    return np.repeat(np.repeat(glyph, scale, axis=0), scale, axis=1)


def tight_bounds(glyph: np.ndarray) -> tuple[int, int, int, int]:
    """(top, left, height, width) of the lit pixels within a bitmap."""
    ys, xs = np.nonzero(glyph)
    if len(ys) == 0:
        raise ValueError("glyph has no lit pixels")
    top, left = int(ys.min()), int(xs.min())
    return top, left, int(ys.max()) - top + 1, int(xs.max()) - left + 1


def write_atlas(path: str, atlas: list[np.ndarray] | None = None) -> None:
    """Serialize an atlas: magic, version u16, count u8, per-glyph h/w u8 +
    row-major bytes, then a CRC32 of everything preceding it."""
    atlas = builtin_atlas() if atlas is None else atlas
    out = bytearray()
    out += GLYPH_MAGIC
    out += struct.pack("<H", GLYPH_VERSION)
    out += struct.pack("<B", len(atlas))
    for glyph in atlas:
        h, w = glyph.shape
        out += struct.pack("<BB", h, w)
        out += glyph.astype(np.uint8).tobytes()
    out += struct.pack("<I", zlib.crc32(bytes(out)))
    with open(path, "wb") as f:
        f.write(bytes(out))


def read_atlas(path: str) -> list[np.ndarray]:
    with open(path, "rb") as f:
        raw = f.read()
    if raw[:4] != GLYPH_MAGIC:
        raise ValueError("not a glyph atlas file (bad magic)")
    (crc,) = struct.unpack("<I", raw[-4:])
    if crc != zlib.crc32(raw[:-4]):
        raise ValueError("glyph atlas checksum mismatch")
    (version,) = struct.unpack("<H", raw[4:6])
    if version != GLYPH_VERSION:
        raise ValueError(f"unsupported atlas version {version}")
    count = raw[6]
    atlas = []
    offset = 7
    for _ in range(count):
        h, w = raw[offset], raw[offset + 1]
        offset += 2
        bitmap = np.frombuffer(raw, dtype=np.uint8, count=h * w, offset=offset)
        atlas.append(bitmap.reshape(h, w).copy())
        offset += h * w
    return atlas


def load_mnist_glyphs(images_path: str, labels_path: str, threshold: int = 128) -> list[np.ndarray]:
    """Build an atlas from MNIST idx files: first instance of each digit,
    binarized at ``threshold`` and cropped to its lit pixels."""
    with open(labels_path, "rb") as f:
        magic, n = struct.unpack(">II", f.read(8))
        if magic != 2049:
            raise ValueError("not an idx1 label file")
        labels = np.frombuffer(f.read(n), dtype=np.uint8)
    with open(images_path, "rb") as f:
        magic, n, rows, cols = struct.unpack(">IIII", f.read(16))
        if magic != 2051:
            raise ValueError("not an idx3 image file")
        images = np.frombuffer(f.read(n * rows * cols), dtype=np.uint8)
        images = images.reshape(n, rows, cols)

    atlas: list[np.ndarray | None] = [None] * 10
    for label, image in zip(labels, images):
        if atlas[label] is None:
            bitmap = (image >= threshold).astype(np.uint8)
            top, left, h, w = tight_bounds(bitmap)
            atlas[label] = bitmap[top : top + h, left : left + w]
        if all(g is not None for g in atlas):
            break
    missing = [d for d, g in enumerate(atlas) if g is None]
    if missing:
        raise ValueError(f"no instance found for digits {missing}")
    return [g for g in atlas if g is not None]
