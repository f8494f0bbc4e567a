"""Teacher policies: scripted heuristics and a compact DQN trainer."""

from .base import FallingHeuristicTeacher, PacmanGreedyTeacher, QFunctionTeacher, Teacher
from .dqn import DqnConfig, DqnResult, QFunction, QNetwork, ReplayBuffer, dqn_train, load_teacher, save_teacher
from .heuristics import falling_heuristic, pacman_greedy

__all__ = [
    "FallingHeuristicTeacher",
    "PacmanGreedyTeacher",
    "QFunctionTeacher",
    "Teacher",
    "DqnConfig",
    "DqnResult",
    "QFunction",
    "QNetwork",
    "ReplayBuffer",
    "dqn_train",
    "load_teacher",
    "save_teacher",
    "falling_heuristic",
    "pacman_greedy",
]
