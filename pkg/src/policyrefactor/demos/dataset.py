"""Demonstration dataset container and on-disk layout.

A dataset directory holds:
  * ``manifest.json``  — task id, counts, target semantics, collection
    metadata (epsilon mix, filter threshold, teacher checkpoint hash).
  * ``samples.jsonl``  — one row per sample: index, episode id, step,
    episode return, target vector, data parameter sigma.
  * ``frames/``        — one lossless PNG per sample.

Save -> load round-trips targets bit-exactly (JSON shortest-repr floats)
and frames byte-exactly (PNG is lossless).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..envs.base import BBox, GroundTruthObject

FORMAT_VERSION = 1

TARGET_Q_VALUES = "q_values"
TARGET_LOGITS = "logits"
TARGET_SCALAR = "scalar"
_SEMANTICS = (TARGET_Q_VALUES, TARGET_LOGITS, TARGET_SCALAR)


@dataclass
class DemoDataset:
    task_id: str
    target_semantics: str
    frames: np.ndarray  # uint8 [N, H, W, 3]
    targets: np.ndarray  # float64 [N, T]
    episode_ids: np.ndarray  # int64 [N]
    step_indices: np.ndarray  # int64 [N]
    episode_returns: np.ndarray  # float64 [N] (the full episode's return)
    sigmas: np.ndarray  # float64 [N], data parameters (init 0)
    metadata: dict = field(default_factory=dict)
    gt: list[list[GroundTruthObject]] | None = None  # per-sample annotations
    actions: np.ndarray | None = None  # int64 [N], executed action per sample

    def __post_init__(self):
        if self.target_semantics not in _SEMANTICS:
            raise ValueError(f"unknown target semantics {self.target_semantics!r}")
        n = len(self.frames)
        for name in ("targets", "episode_ids", "step_indices", "episode_returns", "sigmas"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} length != frame count")
        if self.targets.ndim != 2:
            raise ValueError("targets must be [N, T]")
        if self.target_semantics == TARGET_SCALAR and self.targets.shape[1] != 1:
            raise ValueError("scalar targets must have T == 1")
        if not np.isfinite(self.sigmas).all():
            raise ValueError("sigmas must be finite")
        if self.gt is not None and len(self.gt) != n:
            raise ValueError("gt length != frame count")
        if self.actions is not None and len(self.actions) != n:
            raise ValueError("actions length != frame count")

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def target_dim(self) -> int:
        return self.targets.shape[1]

    def subset(self, indices: np.ndarray) -> "DemoDataset":
        indices = np.asarray(indices)
        return DemoDataset(
            task_id=self.task_id,
            target_semantics=self.target_semantics,
            frames=self.frames[indices],
            targets=self.targets[indices],
            episode_ids=self.episode_ids[indices],
            step_indices=self.step_indices[indices],
            episode_returns=self.episode_returns[indices],
            sigmas=self.sigmas[indices],
            metadata=dict(self.metadata),
            gt=[self.gt[int(i)] for i in indices] if self.gt is not None else None,
            actions=self.actions[indices] if self.actions is not None else None,
        )

    def manifest(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "task_id": self.task_id,
            "sample_count": len(self),
            "target_semantics": self.target_semantics,
            "target_dim": self.target_dim,
            "frame_shape": list(self.frames.shape[1:]),
            "metadata": self.metadata,
        }


def save_dataset(root: str | Path, dataset: DemoDataset) -> None:
    from PIL import Image

    root = Path(root)
    (root / "frames").mkdir(parents=True, exist_ok=True)
    with open(root / "manifest.json", "w") as f:
        json.dump(dataset.manifest(), f, indent=2)
    with open(root / "samples.jsonl", "w") as f:
        for i in range(len(dataset)):
            row = {
                "i": i,
                "episode": int(dataset.episode_ids[i]),
                "step": int(dataset.step_indices[i]),
                "return": float(dataset.episode_returns[i]),
                "target": [float(v) for v in dataset.targets[i]],
                "sigma": float(dataset.sigmas[i]),
            }
            if dataset.actions is not None:
                row["action"] = int(dataset.actions[i])
            if dataset.gt is not None:
                row["gt"] = [
                    {
                        "kind": o.kind,
                        "id": o.entity_id,
                        "value": o.value,
                        "box": [o.box.x_ctr, o.box.y_ctr, o.box.w, o.box.h],
                    }
                    for o in dataset.gt[i]
                ]
            f.write(json.dumps(row) + "\n")
        # one fsync-friendly flush per file is enough at this scale
    for i in range(len(dataset)):
        Image.fromarray(dataset.frames[i]).save(root / "frames" / f"{i:08d}.png")


def load_dataset(root: str | Path) -> DemoDataset:
    from PIL import Image

    root = Path(root)
    with open(root / "manifest.json") as f:
        manifest = json.load(f)
    if manifest.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported dataset format {manifest.get('format_version')}")
    n = manifest["sample_count"]

    rows = []
    with open(root / "samples.jsonl") as f:
        for line in f:
            rows.append(json.loads(line))
    if len(rows) != n:
        raise ValueError(f"manifest promises {n} samples, index has {len(rows)}")

    frame_shape = tuple(manifest["frame_shape"])
    frames = np.zeros((n, *frame_shape), dtype=np.uint8)
    targets = np.zeros((n, manifest["target_dim"]), dtype=np.float64)
    episode_ids = np.zeros(n, dtype=np.int64)
    step_indices = np.zeros(n, dtype=np.int64)
    episode_returns = np.zeros(n, dtype=np.float64)
    sigmas = np.zeros(n, dtype=np.float64)
    has_actions = any("action" in row for row in rows)
    actions = np.full(n, -1, dtype=np.int64) if has_actions else None
    has_gt = any("gt" in row for row in rows)
    gt: list[list[GroundTruthObject]] | None = [[] for _ in range(n)] if has_gt else None
    for row in rows:
        i = row["i"]
        frames[i] = np.asarray(Image.open(root / "frames" / f"{i:08d}.png"))
        targets[i] = row["target"]
        episode_ids[i] = row["episode"]
        step_indices[i] = row["step"]
        episode_returns[i] = row["return"]
        sigmas[i] = row["sigma"]
        if has_actions:
            actions[i] = row.get("action", -1)
        if has_gt:
            gt[i] = [
                GroundTruthObject(
                    box=BBox(*o["box"]), kind=o["kind"], entity_id=o["id"],
                    value=o["value"],
                )
                for o in row.get("gt", [])
            ]
    return DemoDataset(
        task_id=manifest["task_id"],
        target_semantics=manifest["target_semantics"],
        frames=frames,
        targets=targets,
        episode_ids=episode_ids,
        step_indices=step_indices,
        episode_returns=episode_returns,
        sigmas=sigmas,
        metadata=manifest.get("metadata", {}),
        gt=gt,
        actions=actions,
    )


def merge_datasets(datasets: list[DemoDataset]) -> DemoDataset:
    """Concatenate shards; episode ids are offset so they stay unique.

    Order is deterministic: shards in the given order, samples in shard
    order (worker id, episode id, step).
    """
    if not datasets:
        raise ValueError("nothing to merge")
    first = datasets[0]
    for d in datasets[1:]:
        if d.task_id != first.task_id or d.target_semantics != first.target_semantics:
            raise ValueError("cannot merge datasets from different tasks")
        if d.target_dim != first.target_dim:
            raise ValueError("target dimension mismatch")

    episode_ids = []
    offset = 0
    for d in datasets:
        episode_ids.append(d.episode_ids + offset)
        offset += int(d.episode_ids.max()) + 1 if len(d) else 0
    return DemoDataset(
        task_id=first.task_id,
        target_semantics=first.target_semantics,
        frames=np.concatenate([d.frames for d in datasets]),
        targets=np.concatenate([d.targets for d in datasets]),
        episode_ids=np.concatenate(episode_ids),
        step_indices=np.concatenate([d.step_indices for d in datasets]),
        episode_returns=np.concatenate([d.episode_returns for d in datasets]),
        sigmas=np.concatenate([d.sigmas for d in datasets]),
        metadata={"merged_from": [d.metadata for d in datasets]},
        gt=(sum([d.gt for d in datasets], [])
            if all(d.gt is not None for d in datasets) else None),
        actions=(np.concatenate([d.actions for d in datasets])
                 if all(d.actions is not None for d in datasets) else None),
    )
