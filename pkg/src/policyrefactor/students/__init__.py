"""Student policies: object-centric graph networks plus full-frame
baselines, trained by behaviour cloning with data-parameter reweighting."""

from .augment import augment_low_confidence, degrade_detections
from .baselines import CnnSpec, PlainCnn, RelationModule, RelationNet
from .gnn import (
    ARCH_CNN,
    ARCH_EDGECONV,
    ARCH_POINTSTYLE,
    ARCH_RELATION,
    FallingEdgeConv,
    MultiMnistPointNet,
    PacmanPointConv,
    PatchEncoder,
)
from .graphs import (
    TOPOLOGY_COMPLETE_NOSELF,
    TOPOLOGY_COMPLETE_SELF,
    TOPOLOGY_EMPTY,
    GraphBatch,
    GraphSpec,
    SceneGraph,
    batch_edges,
    build_scene_graph,
    detections_from_gt,
)
from .loss import DataParameterBank, bc_loss, reweight
from .policy import StudentPolicy, StudentSpec, build_network
from .train import (
    DetectorBoxSource,
    FixedBoxSource,
    GtBoxSource,
    StudentResult,
    StudentTrainConfig,
    train_student,
)

__all__ = [
    "augment_low_confidence",
    "degrade_detections",
    "CnnSpec",
    "PlainCnn",
    "RelationModule",
    "RelationNet",
    "ARCH_CNN",
    "ARCH_EDGECONV",
    "ARCH_POINTSTYLE",
    "ARCH_RELATION",
    "FallingEdgeConv",
    "MultiMnistPointNet",
    "PacmanPointConv",
    "PatchEncoder",
    "TOPOLOGY_COMPLETE_NOSELF",
    "TOPOLOGY_COMPLETE_SELF",
    "TOPOLOGY_EMPTY",
    "GraphBatch",
    "GraphSpec",
    "SceneGraph",
    "batch_edges",
    "build_scene_graph",
    "detections_from_gt",
    "DataParameterBank",
    "bc_loss",
    "reweight",
    "StudentPolicy",
    "StudentSpec",
    "build_network",
    "DetectorBoxSource",
    "FixedBoxSource",
    "GtBoxSource",
    "StudentResult",
    "StudentTrainConfig",
    "train_student",
]
