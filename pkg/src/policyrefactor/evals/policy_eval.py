"""Greedy policy evaluation and generalization sweeps."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..demos.dataset import DemoDataset
from ..detector.model import SpaceModel
from ..envs.base import StepResult
from ..rng import Pcg32, episode_rng
from ..students.graphs import detections_from_gt
from ..students.policy import StudentPolicy
from ..teachers.base import Teacher
from ..teachers.dqn import QFunction


@dataclass
class MetricReport:
    mean: float
    stdev: float
    episodes: int
    returns: list[float] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)


class Policy:
    """Evaluation-time policy: picks the argmax action for an observation."""

    def act(self, env, obs: StepResult) -> int:
        raise NotImplementedError


class TeacherPolicy(Policy):
    def __init__(self, teacher: Teacher):
        self.teacher = teacher

    def act(self, env, obs: StepResult) -> int:
        return self.teacher.act(env, obs)


class RandomPolicy(Policy):
    def __init__(self, action_count: int, rng: Pcg32):
        self.action_count = action_count
        self.rng = rng

    def act(self, env, obs: StepResult) -> int:
        return self.rng.next_below(self.action_count)


class QPolicy(Policy):
    def __init__(self, qfunction: QFunction):
        self.qfunction = qfunction

    def act(self, env, obs: StepResult) -> int:
        return self.qfunction.act(obs.frame)


class StudentPipelinePolicy(Policy):
    """Student policy behind its perception route.

    ``box_source`` is "gt" (ground-truth boxes from the environment) or a
    trained detector model; full-frame students ignore it.
    """

    def __init__(self, student: StudentPolicy, box_source="gt", threshold: float = 0.1):
        self.student = student
        self.box_source = box_source
        self.threshold = threshold

    def _objects(self, obs: StepResult):
        if not self.student.is_graph_policy:
            return None
        if isinstance(self.box_source, SpaceModel):
            return self.box_source.detect(obs.frame, self.threshold)
        if self.box_source == "gt":
            return detections_from_gt(obs.gt)
        raise ValueError(f"unknown box source {self.box_source!r}")

    def act(self, env, obs: StepResult) -> int:
        scores = self.student.predict(obs.frame, self._objects(obs))
        return int(np.argmax(scores))


def eval_policy(policy: Policy, env_factory, n_episodes: int, rng: Pcg32,
                max_steps: int = 10_000) -> MetricReport:
    """Mean +/- stdev of greedy episode returns over seeded episodes."""
    seed_base = rng.next_u32()
    returns = []
    for ep in range(n_episodes):
        env = env_factory()
        obs = env.reset(episode_rng(seed_base, ep))
        total = 0.0
        steps = 0
        while not obs.done and steps < max_steps:
            obs = env.step(policy.act(env, obs))
            total += obs.reward
            steps += 1
        returns.append(total)
    arr = np.array(returns)
    return MetricReport(
        mean=float(arr.mean()),
        stdev=float(arr.std(ddof=0)),
        episodes=n_episodes,
        returns=[float(r) for r in returns],
        metadata={"seed_base": int(seed_base)},
    )


@dataclass
class SweepSpec:
    env_id: str  # pacman | falling_digit
    variable: str  # n_dots | n_targets
    values: list[int]
    episodes_per_point: int = 100
    seed: int = 0

    def __post_init__(self):
        if not self.values:
            raise ValueError("sweep needs at least one value")


def sweep(policy: Policy, spec: SweepSpec, env_builder) -> dict[int, MetricReport]:
    """Evaluate one policy across object counts.

    ``env_builder(value)`` returns an env factory for one sweep point.
    """
    out = {}
    for point, value in enumerate(spec.values):
        rng = Pcg32(spec.seed, stream=point)
        out[value] = eval_policy(policy, env_builder(value), spec.episodes_per_point, rng)
    return out


def accuracy_multi_mnist(predictions: np.ndarray, labels: np.ndarray) -> float:
    """Fraction of predictions within 0.5 of the label (strict inequality)."""
    predictions = np.asarray(predictions, dtype=np.float64).ravel()
    labels = np.asarray(labels, dtype=np.float64).ravel()
    if predictions.shape != labels.shape:
        raise ValueError("prediction/label length mismatch")
    return float(np.mean(np.abs(predictions - labels) < 0.5))


def predict_dataset(student: StudentPolicy, dataset: DemoDataset,
                    box_source="gt", detector_threshold: float = 0.1,
                    batch_size: int = 64) -> np.ndarray:
    """Batched student predictions for every sample of a dataset."""
    outputs = []
    for start in range(0, len(dataset), batch_size):
        idx = range(start, min(start + batch_size, len(dataset)))
        if student.is_graph_policy:
            graphs = []
            for i in idx:
                if isinstance(box_source, SpaceModel):
                    objs = box_source.detect(dataset.frames[i], detector_threshold)
                else:
                    objs = detections_from_gt(dataset.gt[i])
                graphs.append(student.graph_for(dataset.frames[i], objs))
            outputs.append(student.predict_graphs(graphs))
        else:
            outputs.append(student.predict_frames(dataset.frames[list(idx)]))
    return np.concatenate(outputs)
