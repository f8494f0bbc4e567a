"""Object-centric scene graphs and their batched representation.

A scene graph holds one node per detected object: the image patch cropped
at the object's box plus the box itself. Edge topology is a per-task
constant: the digit-sum task uses no edges (the prediction is a set sum),
the control tasks use complete digraphs with self-loops; complete without
self-loops is reserved for tasks whose readout must exclude them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from ..detector.model import Detection
from ..detector.stn import crop_boxes
from ..envs.base import BBox, GroundTruthObject

TOPOLOGY_EMPTY = "empty"
TOPOLOGY_COMPLETE_SELF = "complete_with_self_loops"
TOPOLOGY_COMPLETE_NOSELF = "complete_no_self_loops"
_TOPOLOGIES = (TOPOLOGY_EMPTY, TOPOLOGY_COMPLETE_SELF, TOPOLOGY_COMPLETE_NOSELF)


@dataclass
class GraphSpec:
    patch_size: int
    topology: str
    include_box: bool

    def __post_init__(self):
        if self.topology not in _TOPOLOGIES:
            raise ValueError(f"unknown topology {self.topology!r}")


@dataclass
class SceneGraph:
    patches: torch.Tensor  # [N, 3, P, P] float
    boxes: torch.Tensor  # [N, 4] float (x_ctr, y_ctr, w, h)
    topology: str

    @property
    def node_count(self) -> int:
        return self.patches.shape[0]


def as_boxes(objects) -> list[BBox]:
    """Normalize detections / ground-truth objects / raw boxes to BBox."""
    out = []
    for obj in objects:
        if isinstance(obj, BBox):
            out.append(obj)
        elif isinstance(obj, (Detection, GroundTruthObject)):
            out.append(obj.box)
        else:
            raise TypeError(f"cannot extract a box from {type(obj).__name__}")
    return out


def detections_from_gt(gt: list[GroundTruthObject]) -> list[Detection]:
    """Wrap ground-truth boxes as perfect-score detections (the detector
    ablation path)."""
    return [Detection(box=o.box, score=1.0, what=np.zeros(1), depth=0.0) for o in gt]


def frame_to_tensor(frame: np.ndarray) -> torch.Tensor:
    arr = frame.astype(np.float32)
    if frame.dtype == np.uint8:
        arr = arr / 255.0
    return torch.from_numpy(arr).permute(2, 0, 1)


def build_scene_graph(frame: np.ndarray, objects, spec: GraphSpec) -> SceneGraph:
    """Crop one patch per object at the task patch size.

    ``objects`` may be detections, ground-truth objects, or plain boxes.
    Zero objects produce an empty graph; the policy head still emits its
    bias output for it.
    """
    boxes = as_boxes(objects)
    if not boxes:
        return SceneGraph(
            patches=torch.zeros(0, 3, spec.patch_size, spec.patch_size),
            boxes=torch.zeros(0, 4),
            topology=spec.topology,
        )
    image = frame_to_tensor(frame)[None]
    box_t = torch.tensor([[b.x_ctr, b.y_ctr, b.w, b.h] for b in boxes],
                         dtype=torch.float32)
    images = image.expand(len(boxes), -1, -1, -1)
    patches = crop_boxes(images, box_t, spec.patch_size)
    return SceneGraph(patches=patches, boxes=box_t, topology=spec.topology)


@dataclass
class GraphBatch:
    """Concatenated nodes of many graphs plus their graph indices."""

    patches: torch.Tensor  # [M, 3, P, P]
    boxes: torch.Tensor  # [M, 4]
    node2graph: torch.Tensor  # [M] int64
    n_graphs: int
    topology: str

    @staticmethod
    def from_graphs(graphs: list[SceneGraph]) -> "GraphBatch":
        if not graphs:
            raise ValueError("empty batch")
        topology = graphs[0].topology
        if any(g.topology != topology for g in graphs):
            raise ValueError("mixed topologies in one batch")
        idx = torch.cat(
            [torch.full((g.node_count,), i, dtype=torch.int64) for i, g in enumerate(graphs)]
        ) if graphs else torch.zeros(0, dtype=torch.int64)
        return GraphBatch(
            patches=torch.cat([g.patches for g in graphs]),
            boxes=torch.cat([g.boxes for g in graphs]),
            node2graph=idx,
            n_graphs=len(graphs),
            topology=topology,
        )


_EDGE_CACHE: dict[tuple[int, bool], tuple[torch.Tensor, torch.Tensor]] = {}


def _complete_edges(n: int, self_loops: bool) -> tuple[torch.Tensor, torch.Tensor]:
    key = (n, self_loops)
    if key not in _EDGE_CACHE:
        senders, receivers = [], []
        for s in range(n):
            for r in range(n):
                if not self_loops and s == r:
                    continue
                senders.append(s)
                receivers.append(r)
        _EDGE_CACHE[key] = (torch.tensor(senders, dtype=torch.int64),
                            torch.tensor(receivers, dtype=torch.int64))
    return _EDGE_CACHE[key]


def batch_edges(batch: GraphBatch) -> tuple[torch.Tensor, torch.Tensor]:
    """(senders, receivers) node indices for all graphs in the batch."""
    if batch.topology == TOPOLOGY_EMPTY:
        return (torch.zeros(0, dtype=torch.int64), torch.zeros(0, dtype=torch.int64))
    self_loops = batch.topology == TOPOLOGY_COMPLETE_SELF
    senders, receivers = [], []
    offset = 0
    counts = torch.bincount(batch.node2graph, minlength=batch.n_graphs)
    for n in counts.tolist():
        if n > 0:
            s, r = _complete_edges(n, self_loops)
            senders.append(s + offset)
            receivers.append(r + offset)
        offset += n
    if not senders:
        return (torch.zeros(0, dtype=torch.int64), torch.zeros(0, dtype=torch.int64))
    return torch.cat(senders), torch.cat(receivers)


def segment_sum(values: torch.Tensor, index: torch.Tensor, segments: int) -> torch.Tensor:
    out = values.new_zeros((segments, *values.shape[1:]))
    return out.index_add(0, index, values)


def segment_max(values: torch.Tensor, index: torch.Tensor, segments: int) -> torch.Tensor:
    """Per-segment max; segments with no members yield zeros."""
    out = values.new_zeros((segments, *values.shape[1:]))
    if values.shape[0] == 0:
        return out
    out.scatter_reduce_(0, index[:, None].expand_as(values), values, reduce="amax",
                        include_self=False)
    return out
