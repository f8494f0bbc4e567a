"""Student policy container: architecture + graph spec + task wiring."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch

from ..detector.model import Detection
from .baselines import CnnSpec, PlainCnn, RelationNet
from .gnn import (
    ARCH_CNN,
    ARCH_EDGECONV,
    ARCH_POINTSTYLE,
    ARCH_RELATION,
    FallingEdgeConv,
    MultiMnistPointNet,
    PacmanPointConv,
)
from .graphs import GraphBatch, GraphSpec, SceneGraph, build_scene_graph

GRAPH_ARCHS = (ARCH_POINTSTYLE, ARCH_EDGECONV)
FRAME_ARCHS = (ARCH_CNN, ARCH_RELATION)


@dataclass
class StudentSpec:
    """Everything needed to rebuild a student network."""

    arch: str  # gnn_pointstyle | gnn_edgeconv | cnn | relation_net
    task_id: str  # multi_mnist | pacman | falling_digit
    out_dim: int
    graph: GraphSpec | None = None  # graph architectures only
    image_size: int | None = None  # frame architectures only
    params: dict = field(default_factory=dict)  # architecture knobs

    def __post_init__(self):
        if self.arch in GRAPH_ARCHS and self.graph is None:
            raise ValueError(f"{self.arch} needs a graph spec")
        if self.arch in FRAME_ARCHS and self.image_size is None:
            raise ValueError(f"{self.arch} needs an image size")


def build_network(spec: StudentSpec) -> torch.nn.Module:
    p = spec.params
    if spec.arch == ARCH_POINTSTYLE:
        if spec.task_id == "multi_mnist":
            return MultiMnistPointNet(
                spec.graph,
                patch_channels=tuple(p.get("patch_channels", (32, 64, 128, 256))),
                head_hidden=p.get("head_hidden", 512),
                out_dim=spec.out_dim,
            )
        return PacmanPointConv(
            spec.graph,
            patch_channels=tuple(p.get("patch_channels", (32, 64, 128))),
            edge_hidden=p.get("edge_hidden", 128),
            out_dim=spec.out_dim,
        )
    if spec.arch == ARCH_EDGECONV:
        return FallingEdgeConv(
            spec.graph,
            patch_channels=tuple(p.get("patch_channels", (16, 32, 64, 128))),
            hidden=p.get("hidden", 128),
            out_dim=spec.out_dim,
            canonical_edges=p.get("canonical_edges", False),
        )
    cnn_spec = CnnSpec(
        image_size=spec.image_size,
        out_dim=spec.out_dim,
        channels=tuple(p.get("channels", (16, 32, 64, 128))),
        strides=tuple(p["strides"]) if p.get("strides") else None,
        readout=p.get("readout", "gmp"),
        head_hidden=p.get("head_hidden", 256),
        head_bias=p.get("head_bias", True),
    )
    if spec.arch == ARCH_CNN:
        return PlainCnn(cnn_spec)
    if spec.arch == ARCH_RELATION:
        return RelationNet(cnn_spec, heads=p.get("heads", 4),
                           key_dim=p.get("key_dim", 64),
                           with_coords=p.get("with_coords", True))
    raise ValueError(f"unknown architecture {spec.arch!r}")


class StudentPolicy:
    """A trained student: network + the preprocessing it was trained with."""

    def __init__(self, spec: StudentSpec, net: torch.nn.Module | None = None):
        self.spec = spec
        self.net = net if net is not None else build_network(spec)

    @property
    def is_graph_policy(self) -> bool:
        return self.spec.arch in GRAPH_ARCHS

    def graph_for(self, frame: np.ndarray, objects) -> SceneGraph:
        return build_scene_graph(frame, objects, self.spec.graph)

    @torch.no_grad()
    def predict_graphs(self, graphs: list[SceneGraph]) -> np.ndarray:
        self.net.eval()
        return self.net(GraphBatch.from_graphs(graphs)).numpy()

    @torch.no_grad()
    def predict_frames(self, frames: np.ndarray) -> np.ndarray:
        self.net.eval()
        arr = frames.astype(np.float32) / 255.0
        if arr.ndim == 3:
            arr = arr[None]
        x = torch.from_numpy(arr).permute(0, 3, 1, 2)
        return self.net(x).numpy()

    def predict(self, frame: np.ndarray, objects: list[Detection] | None = None) -> np.ndarray:
        if self.is_graph_policy:
            if objects is None:
                raise ValueError("graph policies need detections or ground-truth boxes")
            return self.predict_graphs([self.graph_for(frame, objects)])[0]
        return self.predict_frames(frame)[0]

    def save(self, path: str, extra: dict | None = None) -> None:
        graph = None
        if self.spec.graph is not None:
            graph = {
                "patch_size": self.spec.graph.patch_size,
                "topology": self.spec.graph.topology,
                "include_box": self.spec.graph.include_box,
            }
        torch.save(
            {
                "format_version": 1,
                "kind": "student",
                "spec": {
                    "arch": self.spec.arch,
                    "task_id": self.spec.task_id,
                    "out_dim": self.spec.out_dim,
                    "graph": graph,
                    "image_size": self.spec.image_size,
                    "params": self.spec.params,
                },
                "state_dict": self.net.state_dict(),
                "extra": extra or {},
            },
            path,
        )

    @staticmethod
    def load(path: str) -> "StudentPolicy":
        blob = torch.load(path, weights_only=False)
        if blob.get("format_version") != 1 or blob.get("kind") != "student":
            raise ValueError(f"not a student checkpoint: {path}")
        raw = dict(blob["spec"])
        raw["graph"] = GraphSpec(**raw["graph"]) if raw["graph"] else None
        spec = StudentSpec(**raw)
        policy = StudentPolicy(spec)
        policy.net.load_state_dict(blob["state_dict"])
        policy.net.eval()
        return policy
