"""Teacher interface used by demonstration collection.

A teacher provides the full target vector for the current observation:
Q-values for a trained Q-function, or a one-hot action indicator for the
scripted heuristics. The collector always stores the whole vector, not
the executed action.
"""

from __future__ import annotations

import numpy as np

from ..envs.base import StepResult
from .dqn import QFunction
from .heuristics import falling_heuristic, pacman_greedy


class Teacher:
    action_count: int
    target_semantics: str

    def targets(self, env, obs: StepResult) -> np.ndarray:
        raise NotImplementedError

    def act(self, env, obs: StepResult) -> int:
        return int(np.argmax(self.targets(env, obs)))


class PacmanGreedyTeacher(Teacher):
    action_count = 4
    target_semantics = "logits"

    def targets(self, env, obs: StepResult) -> np.ndarray:
        vec = np.zeros(self.action_count, dtype=np.float64)
        vec[pacman_greedy(env.state)] = 1.0
        return vec


class FallingHeuristicTeacher(Teacher):
    action_count = 3
    target_semantics = "logits"

    def targets(self, env, obs: StepResult) -> np.ndarray:
        vec = np.zeros(self.action_count, dtype=np.float64)
        vec[falling_heuristic(env.state)] = 1.0
        return vec


class QFunctionTeacher(Teacher):
    target_semantics = "q_values"

    def __init__(self, qfunction: QFunction):
        self.qfunction = qfunction
        self.action_count = qfunction.action_count

    def targets(self, env, obs: StepResult) -> np.ndarray:
        return self.qfunction.q_values(obs.frame).astype(np.float64)
