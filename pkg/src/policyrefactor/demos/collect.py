"""Demonstration acquisition: teacher rollouts, episode filtering, and the
supervised digit-sum labeling path.

Collection stores every visited frame together with the teacher's full
target vector (never just the executed action); epsilon-greedy execution
only diversifies the visited states. Datasets gathered with different
epsilons are combined with :func:`policyrefactor.demos.merge_datasets`.
"""

from __future__ import annotations

import numpy as np

from ..envs.backgrounds import BLACK, BackgroundSource
from ..envs.multimnist import mmnist_generate, sample_digit_count
from ..envs.records import EpisodeRecord
from ..rng import Pcg32, episode_rng
from ..teachers.base import Teacher
from .dataset import TARGET_LOGITS, TARGET_SCALAR, DemoDataset


def collect(env_factory, teacher: Teacher, n_frames: int, epsilon: float,
            rng: Pcg32) -> DemoDataset:
    """Roll out the teacher and keep the first ``n_frames`` samples.

    Per step the executed action is the teacher argmax with probability
    1 - epsilon and uniform otherwise (one epsilon draw, then at most one
    action draw). Episodes always run to completion so stored episode
    returns are whole-episode returns.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must be in [0, 1], got {epsilon}")
    env = env_factory()
    if teacher.action_count != env.action_count:
        raise ValueError(
            f"teacher emits {teacher.action_count} actions, env expects {env.action_count}"
        )

    seed_base = rng.next_u32()
    frames, targets, episode_ids, steps, gt = [], [], [], [], []
    actions = []
    episode_of_sample = []
    returns_by_episode: dict[int, float] = {}
    episode = 0
    while len(frames) < n_frames:
        obs = env.reset(episode_rng(seed_base, episode))
        ep_return = 0.0
        step = 0
        while not obs.done:
            vec = teacher.targets(env, obs)
            frames.append(obs.frame.copy())
            gt.append(list(obs.gt))
            targets.append(vec)
            episode_ids.append(episode)
            steps.append(step)
            episode_of_sample.append(episode)
            if rng.next_bool(epsilon):
                action = rng.next_below(env.action_count)
            else:
                action = int(np.argmax(vec))
            actions.append(action)
            obs = env.step(action)
            ep_return += obs.reward
            step += 1
        returns_by_episode[episode] = ep_return
        episode += 1

    keep = slice(0, n_frames)
    episode_returns = np.array(
        [returns_by_episode[e] for e in episode_of_sample], dtype=np.float64
    )[keep]
    return DemoDataset(
        task_id=getattr(env, "task_id", type(env).__name__.lower()),
        target_semantics=teacher.target_semantics,
        frames=np.stack(frames[keep]),
        targets=np.stack(targets[keep]),
        episode_ids=np.array(episode_ids[keep], dtype=np.int64),
        step_indices=np.array(steps[keep], dtype=np.int64),
        episode_returns=episode_returns,
        sigmas=np.zeros(n_frames, dtype=np.float64),
        metadata={"epsilon": epsilon, "episodes": episode, "seed_base": int(seed_base)},
        gt=gt[keep],
        actions=np.array(actions[keep], dtype=np.int64),
    )


def filter_episodes(dataset: DemoDataset, min_return: float) -> DemoDataset:
    """Drop all samples of episodes whose return is below ``min_return``."""
    keep = dataset.episode_returns >= min_return
    if not keep.any():
        raise ValueError(
            f"filter at {min_return} removed every episode "
            f"(returns span [{dataset.episode_returns.min():.3f}, "
            f"{dataset.episode_returns.max():.3f}])"
        )
    out = dataset.subset(np.nonzero(keep)[0])
    total = len(np.unique(dataset.episode_ids))
    kept = len(np.unique(out.episode_ids))
    out.metadata = dict(dataset.metadata)
    out.metadata["episode_filter"] = {
        "min_return": min_return,
        "episodes_before": total,
        "episodes_after": kept,
        "retained_fraction": kept / total,
    }
    return out


def label_multi_mnist(n: int, rng: Pcg32, digits_low: int = 1, digits_high: int = 3,
                      background: BackgroundSource = BLACK,
                      fixed_digits: int | None = None) -> DemoDataset:
    """Generate ``n`` digit-sum images with scalar labels.

    Training draws digit counts uniformly from [digits_low, digits_high];
    pass ``fixed_digits`` (e.g. 4) for the held-out regime.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    frames = []
    gt = []
    labels = np.zeros((n, 1), dtype=np.float64)
    for i in range(n):
        count = fixed_digits if fixed_digits is not None else sample_digit_count(
            rng, digits_low, digits_high)
        frame, total, objects = mmnist_generate(count, background, rng)
        frames.append(frame)
        gt.append(objects)
        labels[i, 0] = float(total)
    return DemoDataset(
        task_id="multi_mnist",
        target_semantics=TARGET_SCALAR,
        frames=np.stack(frames),
        targets=labels,
        episode_ids=np.arange(n, dtype=np.int64),
        step_indices=np.zeros(n, dtype=np.int64),
        episode_returns=labels[:, 0].copy(),
        sigmas=np.zeros(n, dtype=np.float64),
        metadata={
            "digits_low": digits_low,
            "digits_high": digits_high,
            "fixed_digits": fixed_digits,
        },
        gt=gt,
    )


def from_episode_records(records: list[EpisodeRecord], task_id: str,
                         action_count: int) -> DemoDataset:
    """Build a dataset from recorded episodes (e.g. the accelerated engine).

    Targets are one-hot vectors of the executed actions, so records must
    come from pure-greedy teacher rollouts for the targets to equal the
    teacher's choice.
    """
    frames, targets, episode_ids, steps, returns = [], [], [], [], []
    for episode, record in enumerate(records):
        if record.frames is None:
            raise ValueError("records need frames to become demonstrations")
        ep_return = record.episode_return()
        for t in range(len(record.actions)):
            frames.append(record.frames[t])
            vec = np.zeros(action_count, dtype=np.float64)
            vec[int(record.actions[t])] = 1.0
            targets.append(vec)
            episode_ids.append(episode)
            steps.append(t)
            returns.append(ep_return)
    if not frames:
        raise ValueError("no samples in records")
    return DemoDataset(
        task_id=task_id,
        target_semantics=TARGET_LOGITS,
        frames=np.stack(frames),
        targets=np.stack(targets),
        episode_ids=np.array(episode_ids, dtype=np.int64),
        step_indices=np.array(steps, dtype=np.int64),
        episode_returns=np.array(returns, dtype=np.float64),
        sigmas=np.zeros(len(frames), dtype=np.float64),
        metadata={"source": "episode_records", "episodes": len(records)},
        actions=np.array(
            [int(a) for record in records for a in record.actions], dtype=np.int64
        ),
    )
