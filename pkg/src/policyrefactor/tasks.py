"""Per-task default configurations.

Two presets per task: ``paper`` mirrors the published training recipes
(full-scale step counts, channel widths, latent sizes); ``desk`` is a
scaled-down variant whose schedules are compressed proportionally so the
whole pipeline runs on a workstation CPU in minutes. Desk presets change
capacity and step budgets only, never semantics.
"""

from __future__ import annotations

from dataclasses import dataclass

from .detector.model import SpaceConfig
from .detector.priors import PriorSchedule
from .detector.train import DetectorTrainConfig
from .envs.falling import FallingDigitEnv
from .envs.pacman import PacmanEnv
from .students.graphs import TOPOLOGY_COMPLETE_SELF, TOPOLOGY_EMPTY, GraphSpec
from .students.policy import StudentSpec
from .teachers.dqn import DqnConfig

TASKS = ("multi_mnist", "falling_digit", "pacman")


def _check(task_id: str, preset: str) -> None:
    if task_id not in TASKS:
        raise ValueError(f"unknown task {task_id!r}")
    if preset not in ("paper", "desk"):
        raise ValueError(f"unknown preset {preset!r}")


@dataclass(frozen=True)
class TaskInfo:
    task_id: str
    frame_size: int
    action_count: int  # 0 for the single-step digit-sum task
    train_objects: int
    eval_objects: tuple[int, ...]


TASK_INFO = {
    "multi_mnist": TaskInfo("multi_mnist", 54, 0, 3, (4,)),
    "falling_digit": TaskInfo("falling_digit", 128, 3, 3, (3, 5, 7, 9)),
    "pacman": TaskInfo("pacman", 64, 4, 2, (2, 3, 5, 10)),
}


def make_env_factory(task_id: str, n_objects: int, background=None, render: bool = True):
    from .envs.backgrounds import BLACK

    bg = background if background is not None else BLACK
    if task_id == "pacman":
        return lambda: PacmanEnv(n_dots=n_objects, background=bg, render=render)
    if task_id == "falling_digit":
        return lambda: FallingDigitEnv(n_targets=n_objects, background=bg, render=render)
    raise ValueError(f"{task_id} is not an interactive environment")


# ---------------------------------------------------------------- detector
def detector_space_config(task_id: str, preset: str = "paper",
                          background: bool | None = None) -> SpaceConfig:
    """Scene-VAE architecture and priors per task.

    ``background=False`` disables the background branch (black-background
    variants train without one).
    """
    _check(task_id, preset)
    if task_id == "multi_mnist":
        priors = PriorSchedule(pres_prior=(0.1, 0.01, 10_000, 50_000),
                               temperature=(2.0, 0.1, 10_000, 50_000))
        if preset == "desk":
            priors = PriorSchedule(pres_prior=(0.1, 0.01, 1_000, 5_000),
                                   temperature=(2.0, 0.5, 1_000, 5_000))
        return SpaceConfig(
            image_size=54,
            grid=(6, 6),
            glimpse_size=14,
            z_what_dim=50 if preset == "paper" else 12,
            anchor_size=0.2,
            enc_plan=((64, 1), (64, 3), (128, 1), (128, 3), (256, 1))
            if preset == "paper" else ((16, 1), (16, 3), (32, 1), (32, 3), (48, 1)),
            enc_head_channels=128 if preset == "paper" else 48,
            glimpse_hidden=256 if preset == "paper" else 96,
            norm_groups=16 if preset == "paper" else 8,
            background=True if background is None else background,
            bg_plan=((32, 1), (32, 3), (64, 1), (64, 3), (64, 1))
            if preset == "paper" else ((16, 1), (16, 3), (32, 1), (32, 3), (32, 1)),
            bg_hidden=256 if preset == "paper" else 96,
            priors=priors,
        )
    if task_id == "falling_digit":
        priors = PriorSchedule(pres_prior=(0.1, 0.005, 0, 50_000),
                               temperature=(2.5, 0.5, 0, 50_000),
                               bg_recon_std=0.1)
        if preset == "desk":
            priors = PriorSchedule(pres_prior=(0.1, 0.005, 0, 4_000),
                                   temperature=(2.5, 0.5, 0, 4_000),
                                   bg_recon_std=0.1)
        return SpaceConfig(
            image_size=128,
            grid=(16, 16),
            glimpse_size=16,
            z_what_dim=50 if preset == "paper" else 12,
            anchor_size=0.0625,
            enc_plan=((16, 1), (16, 2), (32, 1), (32, 2), (64, 1), (64, 2))
            if preset == "paper" else ((8, 1), (8, 2), (16, 1), (16, 2), (32, 1), (32, 2)),
            enc_head_channels=128 if preset == "paper" else 32,
            glimpse_hidden=256 if preset == "paper" else 64,
            norm_groups=16 if preset == "paper" else 8,
            background=False if background is None else background,
            bg_plan=((16, 2), (16, 2), (32, 2), (32, 2)),
            bg_hidden=128,
            priors=priors,
        )
    priors = PriorSchedule(pres_prior=(0.1, 0.005, 0, 50_000),
                           temperature=(2.5, 0.5, 0, 50_000))
    if preset == "desk":
        priors = PriorSchedule(pres_prior=(0.1, 0.005, 0, 4_000),
                               temperature=(2.5, 0.5, 0, 4_000))
    return SpaceConfig(
        image_size=64,
        grid=(16, 16),
        glimpse_size=8,
        z_what_dim=32 if preset == "paper" else 12,
        anchor_size=0.0625,
        enc_plan=((32, 1), (32, 2), (64, 1), (128, 2), (128, 1))
        if preset == "paper" else ((8, 1), (8, 2), (16, 1), (32, 2), (32, 1)),
        enc_head_channels=128 if preset == "paper" else 32,
        glimpse_hidden=256 if preset == "paper" else 64,
        norm_groups=16 if preset == "paper" else 8,
        background=True if background is None else background,
        bg_plan=((16, 2), (16, 2), (32, 2), (32, 2)),
        bg_hidden=128,
        priors=priors,
    )


def detector_train_config(task_id: str, preset: str = "paper") -> DetectorTrainConfig:
    _check(task_id, preset)
    batch = {"multi_mnist": 64, "falling_digit": 8, "pacman": 8}[task_id]
    if preset == "paper":
        return DetectorTrainConfig(steps=100_000, batch_size=batch)
    return DetectorTrainConfig(steps=10_000, batch_size=8)


# ---------------------------------------------------------------- students
def graph_spec(task_id: str) -> GraphSpec:
    if task_id == "multi_mnist":
        # the sum is position-independent: no boxes on nodes, no edges
        return GraphSpec(patch_size=16, topology=TOPOLOGY_EMPTY, include_box=False)
    if task_id == "falling_digit":
        return GraphSpec(patch_size=16, topology=TOPOLOGY_COMPLETE_SELF, include_box=True)
    if task_id == "pacman":
        return GraphSpec(patch_size=8, topology=TOPOLOGY_COMPLETE_SELF, include_box=True)
    raise ValueError(f"unknown task {task_id!r}")


def student_out_dim(task_id: str) -> int:
    return {"multi_mnist": 1, "falling_digit": 3, "pacman": 4}[task_id]


def student_spec(task_id: str, arch: str, preset: str = "paper") -> StudentSpec:
    """Architecture spec for a (task, architecture) pair."""
    _check(task_id, preset)
    out_dim = student_out_dim(task_id)
    info = TASK_INFO[task_id]
    desk = preset == "desk"
    if arch == "gnn":
        arch = "gnn_pointstyle" if task_id in ("multi_mnist", "pacman") else "gnn_edgeconv"
    if arch in ("gnn_pointstyle", "gnn_edgeconv"):
        params: dict = {}
        if task_id == "multi_mnist":
            params = {"patch_channels": (16, 32, 64, 64) if desk else (32, 64, 128, 256),
                      "head_hidden": 128 if desk else 512}
        elif task_id == "pacman" and arch == "gnn_pointstyle":
            params = {"patch_channels": (16, 32, 64) if desk else (32, 64, 128),
                      "edge_hidden": 64 if desk else 128}
        else:
            params = {"patch_channels": (8, 16, 32, 64) if desk else (16, 32, 64, 128),
                      "hidden": 64 if desk else 128}
        return StudentSpec(arch=arch, task_id=task_id, out_dim=out_dim,
                           graph=graph_spec(task_id), params=params)
    if arch in ("cnn", "relation_net"):
        if task_id == "multi_mnist":
            params = {
                "channels": (16, 16, 32, 32, 64) if desk else (64, 64, 128, 128, 256),
                "strides": (1, 3, 1, 3, 1),
                "readout": "flatten",
                "head_hidden": 128 if desk else 512,
                "head_bias": False,
            }
        else:
            params = {
                "channels": (8, 16, 32, 64) if desk else (16, 32, 64, 128),
                "strides": None,
                "readout": "gmp",
                "head_hidden": 128 if desk else 256,
                "head_bias": True,
            }
        if arch == "relation_net":
            params = dict(params, heads=4, key_dim=32 if desk else 64)
            params["readout"] = "flatten" if task_id == "multi_mnist" else "gmp"
        return StudentSpec(arch=arch, task_id=task_id, out_dim=out_dim,
                           image_size=info.frame_size, params=params)
    raise ValueError(f"unknown architecture {arch!r}")


# ---------------------------------------------------------------- teacher
def dqn_config(task_id: str, preset: str = "paper") -> DqnConfig:
    _check(task_id, preset)
    if task_id == "multi_mnist":
        raise ValueError("the digit-sum task has no interactive teacher")
    if preset == "paper":
        return DqnConfig(
            total_steps=10_000_000,
            eps_anneal_steps=1_000_000 if task_id == "pacman" else 300_000,
            replay_capacity=300_000 if task_id == "pacman" else 100_000,
            reward_threshold=1.5 if task_id == "pacman" else 2.0,
        )
    return DqnConfig(
        total_steps=200_000,
        eps_anneal_steps=60_000,
        replay_capacity=50_000,
        learn_start=2_000,
        eval_every=20_000,
        eval_episodes=20,
        reward_threshold=1.5 if task_id == "pacman" else 2.0,
        channels=(8, 16, 32, 64),
        hidden=128,
    )
