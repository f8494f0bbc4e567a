"""Dot-eating grid game on a 14x14 board rendered to 64x64 frames.

Rules: the player moves one cell per action (up/down/left/right, clamped at
walls), pays -0.01 per move, and gains +1 for entering a dot cell (net
+0.99 on the eating move). The episode ends when all dots are eaten or
after 100 actions.

RNG call order at reset (one sequence, shared with replays):
  1. if the background uses a seed: ``bg_seed = rng.next_u32()``
  2. player cell: ``next_below(196)``
  3. each dot in order: ``next_below(196)`` redrawn until the cell is free.

Steps consume no randomness.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import kernels
from ..rng import Pcg32
from .backgrounds import BLACK, BackgroundSource
from .base import BBox, GroundTruthObject, KIND_DOT, KIND_PLAYER, StepResult

GRID = 14
CELL_PX = 4
MARGIN_PX = 4
FRAME_SIZE = GRID * CELL_PX + 2 * MARGIN_PX  # 64
MAX_STEPS = 100
MOVE_REWARD = -0.01
EAT_REWARD = 0.99  # +1 dot, -0.01 move
TEXTURE_BLOCK = 8

ACTIONS = ("up", "down", "left", "right")
_DELTAS = ((-1, 0), (1, 0), (0, -1), (0, 1))

PLAYER_COLOR = (255, 220, 40)
DOT_COLOR = (255, 255, 255)


@dataclass
class PacmanState:
    player: tuple[int, int]
    dots: list[tuple[int, tuple[int, int]]]  # (entity_id, cell), creation order
    steps_taken: int = 0
    done: bool = False
    bg_seed: int = 0

    def dot_cells(self) -> set[tuple[int, int]]:
        return {cell for _, cell in self.dots}


def pacman_reset(n_dots: int, rng: Pcg32, background: BackgroundSource = BLACK) -> PacmanState:
    if n_dots < 1:
        raise ValueError(f"n_dots must be >= 1, got {n_dots}")
    if n_dots + 1 > GRID * GRID:
        raise ValueError(f"{n_dots} dots do not fit a {GRID}x{GRID} grid")
    bg_seed = rng.next_u32() if background.uses_seed else 0
    idx = rng.next_below(GRID * GRID)
    player = (idx // GRID, idx % GRID)
    occupied = {player}
    dots = []
    for i in range(n_dots):
        while True:
            idx = rng.next_below(GRID * GRID)
            cell = (idx // GRID, idx % GRID)
            if cell not in occupied:
                break
        occupied.add(cell)
        dots.append((i + 1, cell))
    return PacmanState(player=player, dots=dots, bg_seed=bg_seed)


def pacman_step(
    state: PacmanState,
    action: int,
    rng: Pcg32 | None = None,
    background: BackgroundSource = BLACK,
    render: bool = True,
) -> StepResult:
    """Advance the state in place and return the resulting observation."""
    if state.done:
        raise RuntimeError("step() called on a finished episode")
    if not 0 <= action < len(ACTIONS):
        raise ValueError(f"invalid action {action}")

    dr, dc = _DELTAS[action]
    r = min(max(state.player[0] + dr, 0), GRID - 1)
    c = min(max(state.player[1] + dc, 0), GRID - 1)
    state.player = (r, c)

    reward = MOVE_REWARD
    for i, (_, cell) in enumerate(state.dots):
        if cell == (r, c):
            del state.dots[i]
            reward = EAT_REWARD
            break

    state.steps_taken += 1
    state.done = not state.dots or state.steps_taken >= MAX_STEPS
    frame = render_pacman(state, background) if render else None
    return StepResult(frame=frame, reward=reward, done=state.done, gt=pacman_gt(state))


def render_pacman(state: PacmanState, background: BackgroundSource = BLACK) -> np.ndarray:
    canvas = np.zeros((FRAME_SIZE, FRAME_SIZE, 3), dtype=np.uint8)
    background.fill(canvas, state.bg_seed, TEXTURE_BLOCK)
    for _, (r, c) in state.dots:
        kernels.fill_rect(canvas, MARGIN_PX + r * CELL_PX + 1, MARGIN_PX + c * CELL_PX + 1,
                          2, 2, *DOT_COLOR)
    pr, pc = state.player
    kernels.fill_rect(canvas, MARGIN_PX + pr * CELL_PX, MARGIN_PX + pc * CELL_PX,
                      CELL_PX, CELL_PX, *PLAYER_COLOR)
    return canvas


def pacman_gt(state: PacmanState) -> list[GroundTruthObject]:
    pr, pc = state.player
    gt = [
        GroundTruthObject(
            box=BBox.from_pixels(MARGIN_PX + pr * CELL_PX, MARGIN_PX + pc * CELL_PX,
                                 CELL_PX, CELL_PX, FRAME_SIZE, FRAME_SIZE),
            kind=KIND_PLAYER,
            entity_id=0,
        )
    ]
    for eid, (r, c) in state.dots:
        gt.append(
            GroundTruthObject(
                box=BBox.from_pixels(MARGIN_PX + r * CELL_PX + 1, MARGIN_PX + c * CELL_PX + 1,
                                     2, 2, FRAME_SIZE, FRAME_SIZE),
                kind=KIND_DOT,
                entity_id=eid,
            )
        )
    return gt


class PacmanEnv:
    """Stateful episode wrapper around the functional ops."""

    env_id = 1
    task_id = "pacman"
    action_count = len(ACTIONS)
    frame_size = FRAME_SIZE

    def __init__(self, n_dots: int = 2, background: BackgroundSource = BLACK,
                 render: bool = True):
        self.n_dots = n_dots
        self.background = background
        self.render = render
        self.state: PacmanState | None = None

    def reset(self, rng: Pcg32) -> StepResult:
        self.state = pacman_reset(self.n_dots, rng, self.background)
        frame = render_pacman(self.state, self.background) if self.render else None
        return StepResult(frame=frame, reward=0.0, done=False, gt=pacman_gt(self.state))

    def step(self, action: int) -> StepResult:
        return pacman_step(self.state, action, background=self.background,
                           render=self.render)

    @property
    def done(self) -> bool:
        return self.state is None or self.state.done
