"""Benchmark the numba kernels against the pure-numpy fallback.

Run:  python benchmarks/bench_kernels.py [n_frames]

Measures full-frame rendering for both games plus the raw kernels, on
both implementations, and prints the speedup. The numpy path is what you
get with POLICYREFACTOR_DISABLE_NUMBA=1.
"""

import sys
import time

import numpy as np

from policyrefactor.envs import falling_reset, pacman_reset
from policyrefactor.kernels import numba_impl, numpy_impl
from policyrefactor.rng import Pcg32


def _time(fn, repeats):
    fn()  # warm up (JIT compile on the numba path)
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - t0) / repeats


def bench_texture(impl, size, block, repeats):
    canvas = np.zeros((size, size, 3), np.uint8)
    return _time(lambda: impl.texture_fill(canvas, 123456789, block), repeats)


def bench_blit(impl, repeats):
    from policyrefactor import glyphs

    canvas = np.zeros((128, 128, 3), np.uint8)
    atlas = glyphs.builtin_atlas()

    def run():
        for i in range(16):
            impl.blit_mask(canvas, atlas[i % 10], (i % 12) * 8, (i % 12) * 8, 1,
                           255, 255, 255)

    return _time(run, repeats)


def bench_pacman_frame(repeats):
    from policyrefactor.envs.backgrounds import BackgroundSource
    from policyrefactor.envs.pacman import render_pacman

    state = pacman_reset(10, Pcg32(0), BackgroundSource("textured"))
    bg = BackgroundSource("textured")
    return _time(lambda: render_pacman(state, bg), repeats)


def main():
    repeats = int(sys.argv[1]) if len(sys.argv) > 1 else 500
    if numba_impl is None:
        print("numba unavailable; nothing to compare")
        return
    rows = [
        ("texture_fill 128px", bench_texture(numpy_impl, 128, 16, repeats),
         bench_texture(numba_impl, 128, 16, repeats)),
        ("glyph blits x16", bench_blit(numpy_impl, repeats),
         bench_blit(numba_impl, repeats)),
    ]
    print(f"{'kernel':24} {'numpy':>12} {'numba':>12} {'speedup':>9}")
    for name, a, b in rows:
        print(f"{name:24} {a * 1e6:>10.1f}us {b * 1e6:>10.1f}us {a / b:>8.1f}x")
    frame = bench_pacman_frame(repeats)
    print(f"\nfull textured frame render (active path): {frame * 1e6:.1f}us "
          f"({1 / frame:,.0f} frames/s)")


if __name__ == "__main__":
    main()
