"""Scripted teacher policies.

Both are deterministic functions of the environment state with fixed,
documented tie-breaking, so two engines (or two runs) always agree on the
demonstrated action.
"""

from __future__ import annotations

from ..envs.falling import FallingState, closest_target
from ..envs.pacman import PacmanState

# action indices
PACMAN_UP, PACMAN_DOWN, PACMAN_LEFT, PACMAN_RIGHT = range(4)
FALL_LEFT, FALL_DOWN, FALL_RIGHT = range(3)


def pacman_greedy(state: PacmanState) -> int:
    """Move one step toward the nearest dot.

    Nearest = smallest Manhattan distance; distance ties break on the
    dot's (row, col); direction ties break in the fixed order
    up < down < left < right. The returned move strictly decreases the
    distance to the chosen dot.
    """
    if not state.dots:
        raise ValueError("no dots left; episode should be over")
    pr, pc = state.player
    target = min(
        (cell for _, cell in state.dots),
        key=lambda cell: (abs(cell[0] - pr) + abs(cell[1] - pc), cell),
    )
    tr, tc = target
    if tr < pr:
        return PACMAN_UP
    if tr > pr:
        return PACMAN_DOWN
    if tc < pc:
        return PACMAN_LEFT
    return PACMAN_RIGHT


def falling_heuristic(state: FallingState) -> int:
    """Steer toward the column of the value-closest target."""
    if state.falling is None:
        raise ValueError("no falling digit")
    _, _, col = state.falling
    target_col = closest_target(state)[2]
    if target_col < col:
        return FALL_LEFT
    if target_col > col:
        return FALL_RIGHT
    return FALL_DOWN
