"""Detector training loop and checkpoint container."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import torch

from ..rng import Pcg32
from .model import SpaceConfig, SpaceModel
from .priors import PriorSchedule


@dataclass
class DetectorTrainConfig:
    steps: int = 100_000
    batch_size: int = 64
    learning_rate: float = 1e-3
    grad_clip: float = 1.0
    log_every: int = 50
    checkpoint_every: int = 500

    def __post_init__(self):
        if self.steps <= 0 or self.batch_size <= 0:
            raise ValueError("steps and batch_size must be positive")


@dataclass
class DetectorResult:
    model: SpaceModel
    step: int
    history: list[dict] = field(default_factory=list)
    aborted: bool = False


def _frames_tensor(frames: np.ndarray) -> torch.Tensor:
    if frames.dtype != np.uint8:
        raise ValueError("expected uint8 frames")
    return torch.from_numpy(frames.astype(np.float32) / 255.0).permute(0, 3, 1, 2)


def train_detector(
    frames: np.ndarray,
    space_config: SpaceConfig,
    train_config: DetectorTrainConfig,
    rng: Pcg32,
) -> DetectorResult:
    """Optimize the scene VAE on a stack of frames [N, H, W, 3] (uint8).

    Adam with gradient-norm clipping; priors anneal over the step index.
    On a non-finite loss the last periodic checkpoint is restored and
    training stops early (result.aborted is set).
    """
    if len(frames) == 0:
        raise ValueError("empty training set")
    torch.manual_seed(rng.next_u32())
    model = SpaceModel(space_config)
    generator = torch.Generator().manual_seed(rng.next_u32())
    optimizer = torch.optim.Adam(model.parameters(), lr=train_config.learning_rate)
    data = _frames_tensor(frames)
    n = data.shape[0]

    history: list[dict] = []
    last_good = {k: v.clone() for k, v in model.state_dict().items()}
    last_good_step = 0
    skipped = 0
    model.train()
    for step in range(1, train_config.steps + 1):
        idx = torch.tensor([rng.next_below(n) for _ in range(train_config.batch_size)])
        batch = data[idx]
        try:
            loss, components, _ = model.elbo(batch, step, generator=generator)
        except FloatingPointError as err:
            warnings.warn(
                f"detector diverged at step {step} ({err}); "
                f"restoring checkpoint from step {last_good_step}",
                stacklevel=2,
            )
            model.load_state_dict(last_good)
            return DetectorResult(model=model, step=last_good_step, history=history,
                                  aborted=True)
        optimizer.zero_grad()
        loss.backward()
        norm = torch.nn.utils.clip_grad_norm_(model.parameters(),
                                              train_config.grad_clip)
        if not torch.isfinite(norm):
            # a gradient spike (not yet a weight problem): drop this step
            optimizer.zero_grad()
            skipped += 1
        else:
            optimizer.step()

        if step % train_config.log_every == 0 or step == 1:
            history.append({"step": step, "loss": loss.item(),
                            "skipped_steps": skipped, **components})
        if step % train_config.checkpoint_every == 0:
            last_good = {k: v.clone() for k, v in model.state_dict().items()}
            last_good_step = step

    model.eval()
    return DetectorResult(model=model, step=train_config.steps, history=history)


def save_detector(path: str, model: SpaceModel, step: int,
                  extra: dict | None = None) -> None:
    cfg = model.config
    torch.save(
        {
            "format_version": 1,
            "kind": "detector",
            "space_config": {
                "image_size": cfg.image_size,
                "grid": tuple(cfg.grid),
                "glimpse_size": cfg.glimpse_size,
                "z_what_dim": cfg.z_what_dim,
                "anchor_size": cfg.anchor_size,
                "enc_plan": tuple(map(tuple, cfg.enc_plan)),
                "enc_head_channels": cfg.enc_head_channels,
                "glimpse_hidden": cfg.glimpse_hidden,
                "norm_groups": cfg.norm_groups,
                "background": cfg.background,
                "bg_plan": tuple(map(tuple, cfg.bg_plan)),
                "bg_hidden": cfg.bg_hidden,
            },
            "priors": cfg.priors.__dict__,
            "state_dict": model.state_dict(),
            "anchors": cfg.anchor_grid.as_tensor(),
            "step": step,
            "extra": extra or {},
        },
        path,
    )


def load_detector(path: str) -> tuple[SpaceModel, int]:
    blob = torch.load(path, weights_only=False)
    if blob.get("format_version") != 1 or blob.get("kind") != "detector":
        raise ValueError(f"not a detector checkpoint: {path}")
    raw = dict(blob["space_config"])
    raw["priors"] = PriorSchedule(**blob["priors"])
    cfg = SpaceConfig(**raw)
    model = SpaceModel(cfg)
    model.load_state_dict(blob["state_dict"])
    model.eval()
    return model, blob["step"]
