"""Generalization sweeps, detection metrics, robustness harness, and
attribute discovery."""

from .attributes import BACKGROUND_LABEL, cluster_purity, discover_attributes, label_detections
from .metrics import average_precision, detection_metrics, match_detections
from .policy_eval import (
    MetricReport,
    Policy,
    QPolicy,
    RandomPolicy,
    StudentPipelinePolicy,
    SweepSpec,
    TeacherPolicy,
    accuracy_multi_mnist,
    eval_policy,
    predict_dataset,
    sweep,
)
from .robustness import RobustnessSpec, robustness_sweep

__all__ = [
    "BACKGROUND_LABEL",
    "cluster_purity",
    "discover_attributes",
    "label_detections",
    "average_precision",
    "detection_metrics",
    "match_detections",
    "MetricReport",
    "Policy",
    "QPolicy",
    "RandomPolicy",
    "StudentPipelinePolicy",
    "SweepSpec",
    "TeacherPolicy",
    "accuracy_multi_mnist",
    "eval_policy",
    "predict_dataset",
    "sweep",
    "RobustnessSpec",
    "robustness_sweep",
]
