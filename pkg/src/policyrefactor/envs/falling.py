"""Falling-digit game on a 16x16 cell grid rendered to 128x128 frames.

A digit falls one row per action with a lateral offset (down-left / down /
down-right, clamped at the side walls). Target digits sit on the bottom
row. Reaching the bottom row resolves the drop: +1 if the landing column
holds the value-closest target (which is then cleared), otherwise -1
(wrong targets persist). When the drop resolves and the episode is not
over, the next digit spawns at the top in the same step, so the returned
observation always shows an active digit. The episode ends when all
targets are cleared or after 100 actions.

Closest-target rule: minimise |target value - falling value|; break ties
by smaller target value, then by smaller column. A correct hit must land
exactly on that canonical target.

RNG call order at reset:
  1. if the background uses a seed: ``bg_seed = rng.next_u32()``
  2. each target in order: column ``next_below(16)`` redrawn until free,
     then value ``next_below(10)``
  3. the falling digit: column ``next_below(16)``, value ``next_below(10)``.
A respawn during a step draws column then value, in that order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import glyphs, kernels
from ..rng import Pcg32
from .backgrounds import BLACK, BackgroundSource
from .base import BBox, GroundTruthObject, KIND_FALLING, KIND_TARGET, StepResult

COLS = 16
ROWS = 16
CELL_PX = 8
FRAME_SIZE = COLS * CELL_PX  # 128
MAX_STEPS = 100
TEXTURE_BLOCK = 16

ACTIONS = ("down_left", "down", "down_right")
_DCOL = (-1, 0, 1)

DIGIT_COLOR = (255, 255, 255)

_ATLAS = glyphs.builtin_atlas()
_TIGHT = [glyphs.tight_bounds(g) for g in _ATLAS]
_GLYPH_H, _GLYPH_W = _ATLAS[0].shape
# glyph centered inside its cell
_OFF_Y = (CELL_PX - _GLYPH_H) // 2
_OFF_X = (CELL_PX - _GLYPH_W) // 2


@dataclass
class FallingState:
    falling: tuple[int, int, int] | None  # (value, row, col)
    targets: list[tuple[int, int, int]]  # (entity_id, value, col), creation order
    steps_taken: int = 0
    done: bool = False
    bg_seed: int = 0


def falling_reset(n_targets: int, rng: Pcg32, background: BackgroundSource = BLACK) -> FallingState:
    if n_targets < 1:
        raise ValueError(f"n_targets must be >= 1, got {n_targets}")
    if n_targets > COLS:
        raise ValueError(f"{n_targets} targets do not fit {COLS} columns")
    bg_seed = rng.next_u32() if background.uses_seed else 0
    used: set[int] = set()
    targets = []
    for i in range(n_targets):
        while True:
            col = rng.next_below(COLS)
            if col not in used:
                break
        used.add(col)
        value = rng.next_below(10)
        targets.append((i + 1, value, col))
    falling = _spawn(rng)
    return FallingState(falling=falling, targets=targets, bg_seed=bg_seed)


def _spawn(rng: Pcg32) -> tuple[int, int, int]:
    col = rng.next_below(COLS)
    value = rng.next_below(10)
    return (value, 0, col)


def closest_target(state: FallingState) -> tuple[int, int, int]:
    """Canonical value-closest target: min |dv|, then value, then column."""
    if state.falling is None:
        raise RuntimeError("no falling digit")
    fv = state.falling[0]
    return min(state.targets, key=lambda t: (abs(t[1] - fv), t[1], t[2]))


def falling_step(
    state: FallingState,
    action: int,
    rng: Pcg32,
    background: BackgroundSource = BLACK,
    render: bool = True,
) -> StepResult:
    """Advance the state in place and return the resulting observation."""
    if state.done:
        raise RuntimeError("step() called on a finished episode")
    if not 0 <= action < len(ACTIONS):
        raise ValueError(f"invalid action {action}")

    value, row, col = state.falling
    col = min(max(col + _DCOL[action], 0), COLS - 1)
    row += 1

    reward = 0.0
    if row == ROWS - 1:
        canonical = closest_target(state)
        landed = next((t for t in state.targets if t[2] == col), None)
        if landed is not None and landed == canonical:
            reward = 1.0
            state.targets.remove(landed)
        else:
            reward = -1.0
        state.falling = None
    else:
        state.falling = (value, row, col)

    state.steps_taken += 1
    state.done = not state.targets or state.steps_taken >= MAX_STEPS
    if not state.done and state.falling is None:
        state.falling = _spawn(rng)

    frame = render_falling(state, background) if render else None
    return StepResult(frame=frame, reward=reward, done=state.done, gt=falling_gt(state))


def _blit_digit(canvas: np.ndarray, value: int, row: int, col: int) -> None:
    kernels.blit_mask(
        canvas, _ATLAS[value], row * CELL_PX + _OFF_Y, col * CELL_PX + _OFF_X, 1, *DIGIT_COLOR
    )


def render_falling(state: FallingState, background: BackgroundSource = BLACK) -> np.ndarray:
    canvas = np.zeros((FRAME_SIZE, FRAME_SIZE, 3), dtype=np.uint8)
    background.fill(canvas, state.bg_seed, TEXTURE_BLOCK)
    for _, value, col in state.targets:
        _blit_digit(canvas, value, ROWS - 1, col)
    if state.falling is not None:
        value, row, col = state.falling
        _blit_digit(canvas, value, row, col)
    return canvas


def _digit_box(value: int, row: int, col: int) -> BBox:
    t0, l0, th, tw = _TIGHT[value]
    return BBox.from_pixels(
        row * CELL_PX + _OFF_Y + t0,
        col * CELL_PX + _OFF_X + l0,
        th,
        tw,
        FRAME_SIZE,
        FRAME_SIZE,
    )


def falling_gt(state: FallingState) -> list[GroundTruthObject]:
    gt = []
    if state.falling is not None:
        value, row, col = state.falling
        gt.append(
            GroundTruthObject(box=_digit_box(value, row, col), kind=KIND_FALLING,
                              entity_id=0, value=value)
        )
    for eid, value, col in state.targets:
        gt.append(
            GroundTruthObject(box=_digit_box(value, ROWS - 1, col), kind=KIND_TARGET,
                              entity_id=eid, value=value)
        )
    return gt


class FallingDigitEnv:
    """Stateful episode wrapper around the functional ops."""

    env_id = 2
    task_id = "falling_digit"
    action_count = len(ACTIONS)
    frame_size = FRAME_SIZE

    def __init__(self, n_targets: int = 3, background: BackgroundSource = BLACK,
                 render: bool = True):
        self.n_targets = n_targets
        self.background = background
        self.render = render
        self.state: FallingState | None = None
        self._rng: Pcg32 | None = None

    def reset(self, rng: Pcg32) -> StepResult:
        self._rng = rng
        self.state = falling_reset(self.n_targets, rng, self.background)
        frame = render_falling(self.state, self.background) if self.render else None
        return StepResult(frame=frame, reward=0.0, done=False, gt=falling_gt(self.state))

    def step(self, action: int) -> StepResult:
        return falling_step(self.state, action, self._rng, background=self.background,
                            render=self.render)

    @property
    def done(self) -> bool:
        return self.state is None or self.state.done
