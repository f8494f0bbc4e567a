"""Deterministic reference environments and scene generators."""

from .backgrounds import BLACK, BackgroundSource
from .base import BBox, GroundTruthObject, StepResult, box_iou
from .falling import FallingDigitEnv, FallingState, closest_target, falling_reset, falling_step
from .multimnist import mmnist_generate, sample_digit_count
from .pacman import PacmanEnv, PacmanState, pacman_reset, pacman_step
from .records import (
    EpisodeRecord,
    read_record,
    read_record_stream,
    rollout_record,
    write_record,
    write_record_stream,
)

__all__ = [
    "BLACK",
    "BackgroundSource",
    "BBox",
    "GroundTruthObject",
    "StepResult",
    "box_iou",
    "FallingDigitEnv",
    "FallingState",
    "closest_target",
    "falling_reset",
    "falling_step",
    "mmnist_generate",
    "sample_digit_count",
    "PacmanEnv",
    "PacmanState",
    "pacman_reset",
    "pacman_step",
    "EpisodeRecord",
    "read_record",
    "read_record_stream",
    "rollout_record",
    "write_record",
    "write_record_stream",
]
