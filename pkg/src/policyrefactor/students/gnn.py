"""Graph-network student policies.

Three permutation-invariant architectures, matching the per-task recipes:

* ``MultiMnistPointNet`` — per-node patch encoding, global **add** pooling
  (a sum prediction needs additive readout), bias-free hidden layers after
  the readout, scalar head. Empty edge set.
* ``PacmanPointConv`` — complete digraph with self-loops; the message from
  sender s to receiver r is MLP([x_img_s, box_s - box_r]) with a 4-dim
  output, summed over incoming edges, then a global max readout over
  nodes (the action-score head is the aggregation output itself).
* ``FallingEdgeConv`` — complete digraph with self-loops; node feature is
  [x_img, box]; the edge feature is [sender, sender - receiver] (a config
  switch restores the canonical [receiver, sender - receiver] form),
  max-aggregated, two per-node layers, global max pool, MLP head.

Zero-node graphs short-circuit to the head output at a zero readout (the
head bias for the digit-sum model); the event is logged at debug level.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import torch
import torch.nn as nn

from .graphs import (
    TOPOLOGY_COMPLETE_SELF,
    TOPOLOGY_EMPTY,
    GraphBatch,
    GraphSpec,
    batch_edges,
    segment_max,
    segment_sum,
)

logger = logging.getLogger(__name__)

ARCH_POINTSTYLE = "gnn_pointstyle"
ARCH_EDGECONV = "gnn_edgeconv"
ARCH_CNN = "cnn"
ARCH_RELATION = "relation_net"


def _group_norm(ch: int) -> nn.GroupNorm:
    return nn.GroupNorm(max(1, ch // 16), ch)


class PatchEncoder(nn.Module):
    """Small conv stack with 2x max pools down to a 1x1 feature."""

    def __init__(self, patch_size: int, channels: tuple[int, ...]):
        super().__init__()
        layers: list[nn.Module] = []
        in_ch = 3
        size = patch_size
        for i, ch in enumerate(channels):
            layers.append(nn.Conv2d(in_ch, ch, 3, padding=1))
            if i > 0:
                layers.append(_group_norm(ch))
            layers.append(nn.ReLU())
            layers.append(nn.MaxPool2d(2))
            in_ch = ch
            size //= 2
        if size < 1:
            raise ValueError(f"too many pools for patch size {patch_size}")
        self.body = nn.Sequential(*layers)
        self.out_dim = in_ch

    def forward(self, patches: torch.Tensor) -> torch.Tensor:
        h = self.body(patches)
        return torch.amax(h, dim=(2, 3))


class MultiMnistPointNet(nn.Module):
    arch = ARCH_POINTSTYLE

    def __init__(self, spec: GraphSpec, patch_channels=(32, 64, 128, 256),
                 head_hidden: int = 512, out_dim: int = 1):
        super().__init__()
        if spec.topology != TOPOLOGY_EMPTY:
            raise ValueError("the digit-sum point network uses an empty edge set")
        self.spec = spec
        self.encoder = PatchEncoder(spec.patch_size, patch_channels)
        d = self.encoder.out_dim
        self.head = nn.Sequential(
            nn.Linear(d, head_hidden, bias=False), nn.ReLU(),
            nn.Linear(head_hidden, head_hidden, bias=False), nn.ReLU(),
            nn.Linear(head_hidden, out_dim),
        )

    def forward(self, batch: GraphBatch) -> torch.Tensor:
        if batch.patches.shape[0] == 0:
            logger.debug("all-empty graph batch; emitting head bias output")
            pooled = batch.patches.new_zeros((batch.n_graphs, self.encoder.out_dim))
            return self.head(pooled)
        feats = self.encoder(batch.patches)
        pooled = segment_sum(feats, batch.node2graph, batch.n_graphs)
        return self.head(pooled)

    def node_embeddings(self, batch: GraphBatch) -> torch.Tensor:
        """Per-node encoded patch features (the exported object features)."""
        if batch.patches.shape[0] == 0:
            return batch.patches.new_zeros((0, self.encoder.out_dim))
        return self.encoder(batch.patches)


class PacmanPointConv(nn.Module):
    arch = ARCH_POINTSTYLE

    def __init__(self, spec: GraphSpec, patch_channels=(32, 64, 128),
                 edge_hidden: int = 128, out_dim: int = 4):
        super().__init__()
        if spec.topology != TOPOLOGY_COMPLETE_SELF:
            raise ValueError("the dot-game point network uses a complete graph with self-loops")
        if not spec.include_box:
            raise ValueError("this architecture needs box features on nodes")
        self.spec = spec
        self.encoder = PatchEncoder(spec.patch_size, patch_channels)
        d = self.encoder.out_dim
        h = edge_hidden
        self.edge_mlp = nn.Sequential(
            nn.Linear(d + 4, h), _group_norm(h), nn.ReLU(),
            nn.Linear(h, h), _group_norm(h), nn.ReLU(),
            nn.Linear(h, out_dim),
        )
        self.out_dim = out_dim

    def forward(self, batch: GraphBatch) -> torch.Tensor:
        if batch.patches.shape[0] == 0:
            logger.debug("all-empty graph batch; emitting zero-readout output")
            return batch.patches.new_zeros((batch.n_graphs, self.out_dim))
        x_img = self.encoder(batch.patches)
        senders, receivers = batch_edges(batch)
        messages = self.edge_mlp(
            torch.cat([x_img[senders], batch.boxes[senders] - batch.boxes[receivers]], dim=1)
        )
        per_node = segment_sum(messages, receivers, batch.patches.shape[0])
        return segment_max(per_node, batch.node2graph, batch.n_graphs)

    def node_embeddings(self, batch: GraphBatch) -> torch.Tensor:
        """Per-node encoded patch features (the exported object features)."""
        if batch.patches.shape[0] == 0:
            return batch.patches.new_zeros((0, self.encoder.out_dim))
        return self.encoder(batch.patches)


class FallingEdgeConv(nn.Module):
    arch = ARCH_EDGECONV

    def __init__(self, spec: GraphSpec, patch_channels=(16, 32, 64, 128),
                 hidden: int = 128, out_dim: int = 3, canonical_edges: bool = False):
        super().__init__()
        self.spec = spec
        self.canonical_edges = canonical_edges
        self.encoder = PatchEncoder(spec.patch_size, patch_channels)
        d = self.encoder.out_dim + (4 if spec.include_box else 0)
        h = hidden
        self.edge_mlp = nn.Sequential(
            nn.Linear(2 * d, h), _group_norm(h), nn.ReLU(),
            nn.Linear(h, h), _group_norm(h), nn.ReLU(),
        )
        self.node_mlp = nn.Sequential(
            nn.Linear(h, h), _group_norm(h), nn.ReLU(),
            nn.Linear(h, h), _group_norm(h), nn.ReLU(),
        )
        self.head = nn.Sequential(
            nn.Linear(h, h), nn.ReLU(),
            nn.Linear(h, h), nn.ReLU(),
            nn.Linear(h, out_dim),
        )
        self.hidden = h
        self.out_dim = out_dim

    def node_features(self, batch: GraphBatch) -> torch.Tensor:
        x_img = self.encoder(batch.patches)
        if self.spec.include_box:
            return torch.cat([x_img, batch.boxes], dim=1)
        return x_img

    def forward(self, batch: GraphBatch) -> torch.Tensor:
        if batch.patches.shape[0] == 0:
            logger.debug("all-empty graph batch; emitting head bias output")
            pooled = batch.patches.new_zeros((batch.n_graphs, self.hidden))
            return self.head(pooled)
        feats = self.node_features(batch)
        senders, receivers = batch_edges(batch)
        if self.canonical_edges:
            edge_in = torch.cat([feats[receivers], feats[senders] - feats[receivers]], dim=1)
        else:
            edge_in = torch.cat([feats[senders], feats[senders] - feats[receivers]], dim=1)
        messages = self.edge_mlp(edge_in)
        per_node = segment_max(messages, receivers, batch.patches.shape[0])
        per_node = self.node_mlp(per_node)
        pooled = segment_max(per_node, batch.node2graph, batch.n_graphs)
        return self.head(pooled)

    def node_embeddings(self, batch: GraphBatch) -> torch.Tensor:
        """Per-node features after aggregation (the task-driven object
        features exported for attribute discovery)."""
        if batch.patches.shape[0] == 0:
            return batch.patches.new_zeros((0, self.hidden))
        feats = self.node_features(batch)
        senders, receivers = batch_edges(batch)
        if self.canonical_edges:
            edge_in = torch.cat([feats[receivers], feats[senders] - feats[receivers]], dim=1)
        else:
            edge_in = torch.cat([feats[senders], feats[senders] - feats[receivers]], dim=1)
        messages = self.edge_mlp(edge_in)
        per_node = segment_max(messages, receivers, batch.patches.shape[0])
        return self.node_mlp(per_node)
