"""Behaviour-cloning trainer for student policies.

Regresses each student onto the stored teacher targets with a squared-L2
loss, optionally reweighted by learnable per-sample data parameters, with
optional training-time detection degradation (dropped objects, injected
false positives) and low-confidence augmentation. Validation episodes are
held out and the best-validation checkpoint is returned.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import torch

from ..demos.dataset import DemoDataset
from ..detector.model import Detection, SpaceModel
from ..detector.stn import crop_boxes
from ..rng import Pcg32
from .augment import augment_low_confidence, degrade_detections
from .graphs import GraphBatch, detections_from_gt
from .loss import DataParameterBank, bc_loss, reweight
from .policy import StudentPolicy, StudentSpec


# ------------------------------------------------------------- box sources
class GtBoxSource:
    """Ground-truth boxes (the detector-decoupling ablation)."""

    def __init__(self, dataset: DemoDataset):
        if dataset.gt is None:
            raise ValueError("dataset carries no ground-truth annotations")
        self._detections = [detections_from_gt(gt) for gt in dataset.gt]

    def boxes_for(self, idx: int) -> tuple[list[Detection], list[Detection]]:
        return self._detections[idx], []


class DetectorBoxSource:
    """Detections from a trained detector, precomputed per sample."""

    def __init__(self, dataset: DemoDataset, model: SpaceModel, threshold: float = 0.1):
        self.threshold = threshold
        self._above: list[list[Detection]] = []
        self._below: list[list[Detection]] = []
        for i in range(len(dataset)):
            cands = model.candidates(dataset.frames[i])
            self._above.append([c for c in cands if c.score >= threshold])
            self._below.append([c for c in cands if c.score < threshold])

    def boxes_for(self, idx: int) -> tuple[list[Detection], list[Detection]]:
        return self._above[idx], self._below[idx]


class FixedBoxSource:
    """Precomputed (detections, candidate pool) lists, e.g. corrupted sets."""

    def __init__(self, detections: list[list[Detection]],
                 pools: list[list[Detection]] | None = None):
        self._detections = detections
        self._pools = pools or [[] for _ in detections]

    def boxes_for(self, idx: int) -> tuple[list[Detection], list[Detection]]:
        return self._detections[idx], self._pools[idx]


# ------------------------------------------------------------------ config
@dataclass
class StudentTrainConfig:
    steps: int = 5_000
    batch_size: int = 64
    learning_rate: float = 1e-3
    lr_half_every: int = 100_000
    data_parameters: bool = False
    sigma_lr: float = 0.1
    augment_fraction: float = 0.0
    augment_threshold: float = 0.1
    drop_rate: float = 0.0
    false_positives: int = 0
    fp_nominal_size: float = 0.08
    val_fraction: float = 0.1
    eval_every: int = 500
    log_every: int = 100

    def __post_init__(self):
        if not 0.0 <= self.val_fraction < 1.0:
            raise ValueError("val_fraction must be in [0, 1)")
        if self.steps <= 0 or self.batch_size <= 0:
            raise ValueError("steps and batch_size must be positive")


@dataclass
class StudentResult:
    policy: StudentPolicy
    history: list[dict] = field(default_factory=list)
    best_val_loss: float = float("inf")
    sigmas: np.ndarray | None = None
    empty_graph_batches: int = 0


# ----------------------------------------------------------------- batching
def _graph_batch(frames_t: torch.Tensor, sample_indices: list[int],
                 detections_per_sample: list[list[Detection]],
                 patch_size: int, topology: str) -> GraphBatch:
    boxes, node2graph, image_idx = [], [], []
    for g, (idx, dets) in enumerate(zip(sample_indices, detections_per_sample)):
        for d in dets:
            boxes.append([d.box.x_ctr, d.box.y_ctr, d.box.w, d.box.h])
            node2graph.append(g)
            image_idx.append(idx)
    if boxes:
        box_t = torch.tensor(boxes, dtype=torch.float32)
        images = frames_t[torch.tensor(image_idx)]
        patches = crop_boxes(images, box_t, patch_size)
    else:
        box_t = torch.zeros(0, 4)
        patches = torch.zeros(0, 3, patch_size, patch_size)
    return GraphBatch(
        patches=patches,
        boxes=box_t,
        node2graph=torch.tensor(node2graph, dtype=torch.int64),
        n_graphs=len(sample_indices),
        topology=topology,
    )


def _episode_split(dataset: DemoDataset, val_fraction: float) -> tuple[np.ndarray, np.ndarray]:
    """Split sample indices by episode so no episode straddles the split."""
    episodes = np.unique(dataset.episode_ids)
    n_val = int(round(len(episodes) * val_fraction))
    if n_val == 0:
        return np.arange(len(dataset)), np.zeros(0, dtype=np.int64)
    val_eps = set(episodes[-n_val:].tolist())
    mask = np.array([e in val_eps for e in dataset.episode_ids])
    return np.nonzero(~mask)[0], np.nonzero(mask)[0]


# ------------------------------------------------------------------ trainer
def train_student(
    dataset: DemoDataset,
    spec: StudentSpec,
    box_source,
    config: StudentTrainConfig,
    rng: Pcg32,
) -> StudentResult:
    """Train one student on a demonstration dataset.

    ``box_source`` supplies per-sample detections for graph architectures
    (GtBoxSource / DetectorBoxSource / FixedBoxSource); it is ignored by
    the full-frame baselines. Degradation and augmentation apply at batch
    build time, training only; validation uses clean detections.
    """
    torch.manual_seed(rng.next_u32())
    policy = StudentPolicy(spec)
    net = policy.net
    if dataset.target_dim != spec.out_dim:
        raise ValueError(
            f"dataset targets have dim {dataset.target_dim}, head emits {spec.out_dim}"
        )
    graph_mode = policy.is_graph_policy
    if not graph_mode and (config.drop_rate or config.false_positives or
                           config.augment_fraction):
        warnings.warn("detection degradation/augmentation is ignored by "
                      "full-frame architectures", stacklevel=2)

    frames_t = torch.from_numpy(dataset.frames.astype(np.float32) / 255.0).permute(
        0, 3, 1, 2)
    targets_t = torch.from_numpy(dataset.targets.astype(np.float32))
    train_idx, val_idx = _episode_split(dataset, config.val_fraction)

    optimizer = torch.optim.Adam(net.parameters(), lr=config.learning_rate)
    scheduler = torch.optim.lr_scheduler.LambdaLR(
        optimizer, lambda step: 0.5 ** (step // config.lr_half_every))
    bank = DataParameterBank(len(dataset), config.sigma_lr,
                             init=dataset.sigmas) if config.data_parameters else None

    def batch_forward(indices: list[int], training: bool) -> torch.Tensor:
        if graph_mode:
            dets = []
            for i in indices:
                d, pool = box_source.boxes_for(i)
                if training and (config.drop_rate > 0 or config.false_positives > 0):
                    d = degrade_detections(d, config.drop_rate, config.false_positives,
                                           rng, candidate_pool=pool or None,
                                           nominal_size=config.fp_nominal_size)
                if training and config.augment_fraction > 0:
                    d = augment_low_confidence(d, pool, rng,
                                               threshold=config.augment_threshold,
                                               fraction=config.augment_fraction)
                dets.append(d)
            batch = _graph_batch(frames_t, indices, dets, spec.graph.patch_size,
                                 spec.graph.topology)
            return net(batch)
        return net(frames_t[torch.tensor(indices)])

    def val_loss() -> float:
        if len(val_idx) == 0:
            return float("nan")
        net.eval()
        total = 0.0
        with torch.no_grad():
            for start in range(0, len(val_idx), config.batch_size):
                chunk = [int(i) for i in val_idx[start : start + config.batch_size]]
                out = batch_forward(chunk, training=False)
                total += bc_loss(out, targets_t[torch.tensor(chunk)]).sum().item()
        net.train()
        return total / len(val_idx)

    history: list[dict] = []
    best_val = float("inf")
    best_state = {k: v.clone() for k, v in net.state_dict().items()}
    empty_batches = 0
    net.train()
    for step in range(1, config.steps + 1):
        indices = [int(train_idx[rng.next_below(len(train_idx))])
                   for _ in range(config.batch_size)]
        out = batch_forward(indices, training=True)
        losses = bc_loss(out, targets_t[torch.tensor(indices)])
        if bank is not None:
            sigmas = bank.gather(torch.tensor(indices))
            loss = reweight(losses, sigmas)
        else:
            loss = losses.mean()
        if not torch.isfinite(loss):
            raise RuntimeError(
                f"non-finite BC loss at step {step}: per-sample range "
                f"[{losses.min().item():.4g}, {losses.max().item():.4g}]"
            )
        optimizer.zero_grad()
        if bank is not None:
            bank.zero_grad()
        loss.backward()
        optimizer.step()
        scheduler.step()
        if bank is not None:
            bank.step()

        if step % config.log_every == 0 or step == 1:
            history.append({"step": step, "loss": loss.item(),
                            "lr": scheduler.get_last_lr()[0]})
        if step % config.eval_every == 0 or step == config.steps:
            vl = val_loss()
            history.append({"step": step, "val_loss": vl})
            if len(val_idx) and vl < best_val:
                best_val = vl
                best_state = {k: v.clone() for k, v in net.state_dict().items()}

    if len(val_idx):
        net.load_state_dict(best_state)
    net.eval()
    return StudentResult(
        policy=policy,
        history=history,
        best_val_loss=best_val,
        sigmas=bank.values() if bank is not None else None,
        empty_graph_batches=empty_batches,
    )
