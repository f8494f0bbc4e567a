"""Compact image-based DQN used to acquire teacher policies.

Defaults follow the reference training recipe: Adam at 1e-4, gradient
norm clip 10, epsilon 1.0 -> 0.1, target-network sync every 500 env
steps, one gradient step per 4 env steps at batch 32, double-Q targets,
pixels divided by 255.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import torch
import torch.nn as nn

from ..rng import Pcg32, episode_rng
from ..schedules import linear_anneal


@dataclass
class DqnConfig:
    total_steps: int = 200_000
    learning_rate: float = 1e-4
    grad_clip: float = 10.0
    eps_start: float = 1.0
    eps_end: float = 0.1
    eps_anneal_steps: int = 50_000
    target_update_every: int = 500
    replay_capacity: int = 50_000
    discount: float = 0.99
    train_every: int = 4
    batch_size: int = 32
    double_q: bool = True
    learn_start: int = 1_000
    eval_every: int = 10_000
    eval_episodes: int = 20
    reward_threshold: float = 1.5
    channels: tuple[int, ...] = (16, 32, 64, 128)
    hidden: int = 256

    def __post_init__(self):
        for name in ("total_steps", "learning_rate", "grad_clip", "target_update_every",
                     "replay_capacity", "train_every", "batch_size"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        for eps in (self.eps_start, self.eps_end):
            if not 0.0 <= eps <= 1.0:
                raise ValueError(f"epsilon out of [0, 1]: {eps}")

    def epsilon_at(self, step: int) -> float:
        return linear_anneal(self.eps_start, self.eps_end, 0, self.eps_anneal_steps, step)


class QNetwork(nn.Module):
    """Conv stack with stride-2 max pools, global max pool, and an MLP head."""

    def __init__(self, action_count: int, channels: tuple[int, ...] = (16, 32, 64, 128),
                 hidden: int = 256):
        super().__init__()
        layers: list[nn.Module] = []
        in_ch = 3
        for ch in channels:
            layers += [nn.Conv2d(in_ch, ch, 3, padding=1), nn.ReLU(), nn.MaxPool2d(2)]
            in_ch = ch
        layers += [nn.Conv2d(in_ch, in_ch, 1), nn.ReLU()]
        self.features = nn.Sequential(*layers)
        self.head = nn.Sequential(nn.Linear(in_ch, hidden), nn.ReLU(),
                                  nn.Linear(hidden, action_count))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        h = self.features(x)
        h = torch.amax(h, dim=(2, 3))
        return self.head(h)


@dataclass
class QFunction:
    """Trained Q-network plus its preprocessing contract."""

    net: QNetwork
    action_count: int
    pixel_scale: float = 255.0  # frames are uint8; inputs are frame / pixel_scale

    def preprocess(self, frames: np.ndarray) -> torch.Tensor:
        arr = np.asarray(frames, dtype=np.float32) / self.pixel_scale
        if arr.ndim == 3:
            arr = arr[None]
        return torch.from_numpy(arr).permute(0, 3, 1, 2)

    @torch.no_grad()
    def q_values(self, frame: np.ndarray) -> np.ndarray:
        self.net.eval()
        q = self.net(self.preprocess(frame))
        return q.squeeze(0).numpy()

    def act(self, frame: np.ndarray) -> int:
        return int(np.argmax(self.q_values(frame)))


class ReplayBuffer:
    """Ring buffer of uint8 transitions."""

    def __init__(self, capacity: int, frame_shape: tuple[int, int, int]):
        self.capacity = capacity
        self.frames = np.zeros((capacity, *frame_shape), dtype=np.uint8)
        self.next_frames = np.zeros((capacity, *frame_shape), dtype=np.uint8)
        self.actions = np.zeros(capacity, dtype=np.int64)
        self.rewards = np.zeros(capacity, dtype=np.float32)
        self.dones = np.zeros(capacity, dtype=np.float32)
        self.size = 0
        self._cursor = 0

    def push(self, frame, action, reward, next_frame, done):
        i = self._cursor
        self.frames[i] = frame
        self.actions[i] = action
        self.rewards[i] = reward
        self.next_frames[i] = next_frame
        self.dones[i] = float(done)
        self._cursor = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch_size: int, rng: Pcg32):
        idx = np.array([rng.next_below(self.size) for _ in range(batch_size)])
        return (self.frames[idx], self.actions[idx], self.rewards[idx],
                self.next_frames[idx], self.dones[idx])


@dataclass
class DqnResult:
    qfunction: QFunction
    best_eval_return: float
    final_eval_return: float
    reached_threshold: bool
    history: list[dict] = field(default_factory=list)
    gradient_steps: int = 0


def _greedy_eval(env_factory, qf: QFunction, episodes: int, seed: int) -> float:
    total = 0.0
    for ep in range(episodes):
        env = env_factory()
        obs = env.reset(episode_rng(seed, ep))
        while not obs.done:
            obs = env.step(qf.act(obs.frame))
            total += obs.reward
    return total / episodes


def dqn_train(env_factory, config: DqnConfig, rng: Pcg32) -> DqnResult:
    """Train a Q-function on the given environment factory.

    Deterministic for a fixed ``rng`` under single-threaded torch. Returns
    the best evaluation checkpoint; warns when the reward threshold was
    never reached. Raises on non-finite loss.
    """
    env = env_factory()
    torch.manual_seed(rng.next_u32())
    net = QNetwork(env.action_count, config.channels, config.hidden)
    target = QNetwork(env.action_count, config.channels, config.hidden)
    target.load_state_dict(net.state_dict())
    target.eval()
    qf = QFunction(net=net, action_count=env.action_count)
    optimizer = torch.optim.Adam(net.parameters(), lr=config.learning_rate)

    shape = (env.frame_size, env.frame_size, 3)
    replay = ReplayBuffer(config.replay_capacity, shape)
    episode_seed_base = rng.next_u32()
    eval_seed_base = rng.next_u32()

    history: list[dict] = []
    best_return = float("-inf")
    best_state = {k: v.clone() for k, v in net.state_dict().items()}
    grad_steps = 0
    episode_index = 0
    obs = env.reset(episode_rng(episode_seed_base, episode_index))

    for step in range(1, config.total_steps + 1):
        eps = config.epsilon_at(step)
        if rng.next_bool(eps):
            action = rng.next_below(env.action_count)
        else:
            action = qf.act(obs.frame)
        frame = obs.frame
        obs = env.step(action)
        replay.push(frame, action, obs.reward, obs.frame, obs.done)
        if obs.done:
            episode_index += 1
            obs = env.reset(episode_rng(episode_seed_base, episode_index))

        if step % config.train_every == 0 and replay.size >= max(config.batch_size,
                                                                 config.learn_start):
            frames, actions, rewards, next_frames, dones = replay.sample(
                config.batch_size, rng)
            x = qf.preprocess(frames)
            x_next = qf.preprocess(next_frames)
            net.train()
            q = net(x).gather(1, torch.from_numpy(actions)[:, None]).squeeze(1)
            with torch.no_grad():
                q_next_target = target(x_next)
                if config.double_q:
                    best_actions = net(x_next).argmax(dim=1, keepdim=True)
                    q_next = q_next_target.gather(1, best_actions).squeeze(1)
                else:
                    q_next = q_next_target.max(dim=1).values
                y = torch.from_numpy(rewards) + config.discount * (
                    1.0 - torch.from_numpy(dones)) * q_next
            loss = nn.functional.smooth_l1_loss(q, y)
            if not torch.isfinite(loss):
                raise RuntimeError(
                    f"non-finite DQN loss at step {step} "
                    f"(q range [{q.min().item():.3g}, {q.max().item():.3g}])"
                )
            optimizer.zero_grad()
            loss.backward()
            nn.utils.clip_grad_norm_(net.parameters(), config.grad_clip)
            optimizer.step()
            grad_steps += 1

        if step % config.target_update_every == 0:
            target.load_state_dict(net.state_dict())

        if step % config.eval_every == 0 or step == config.total_steps:
            mean_return = _greedy_eval(env_factory, qf, config.eval_episodes,
                                       eval_seed_base + step)
            history.append({"step": step, "eval_return": mean_return,
                            "epsilon": eps, "grad_steps": grad_steps})
            if mean_return > best_return:
                best_return = mean_return
                best_state = {k: v.clone() for k, v in net.state_dict().items()}

    net.load_state_dict(best_state)
    final_return = history[-1]["eval_return"] if history else float("-inf")
    reached = best_return >= config.reward_threshold
    if not reached:
        warnings.warn(
            f"best greedy return {best_return:.3f} below threshold "
            f"{config.reward_threshold:.3f}; returning best checkpoint",
            stacklevel=2,
        )
    return DqnResult(qfunction=qf, best_eval_return=best_return,
                     final_eval_return=final_return, reached_threshold=reached,
                     history=history, gradient_steps=grad_steps)


def save_teacher(path: str, qf: QFunction, extra: dict | None = None) -> None:
    arch = {
        "action_count": qf.action_count,
        "channels": tuple(
            m.out_channels for m in qf.net.features if isinstance(m, nn.Conv2d)
        )[:-1],
        "hidden": qf.net.head[0].out_features,
    }
    names = list(qf.net.state_dict().keys())
    tensors = [t.detach().clone() for t in qf.net.state_dict().values()]
    torch.save(
        {
            "format_version": 1,
            "kind": "teacher_q",
            "arch": arch,
            "param_names": names,
            "param_tensors": tensors,
            "preprocessing": {"pixel_scale": qf.pixel_scale},
            "extra": extra or {},
        },
        path,
    )


def load_teacher(path: str) -> QFunction:
    blob = torch.load(path, weights_only=False)
    if blob.get("format_version") != 1 or blob.get("kind") != "teacher_q":
        raise ValueError(f"not a teacher checkpoint: {path}")
    arch = blob["arch"]
    net = QNetwork(arch["action_count"], tuple(arch["channels"]), arch["hidden"])
    net.load_state_dict(dict(zip(blob["param_names"], blob["param_tensors"])))
    return QFunction(net=net, action_count=arch["action_count"],
                     pixel_scale=blob["preprocessing"]["pixel_scale"])
