"""Attribute discovery: cluster learned object features and score purity."""

from __future__ import annotations

import numpy as np

from ..envs.base import box_iou

BACKGROUND_LABEL = "background"


def label_detections(detections, gt, overlap_threshold: float = 0.25) -> list[str]:
    """Label each detection with the class of its best-overlapping
    ground-truth object (IoU > threshold), else background.

    Digit-bearing objects are labeled by kind:value so attribute clusters
    can separate digit identities.
    """
    labels = []
    for det in detections:
        best, best_iou = None, overlap_threshold
        for obj in gt:
            iou = box_iou(det.box, obj.box)
            if iou > best_iou:
                best, best_iou = obj, iou
        if best is None:
            labels.append(BACKGROUND_LABEL)
        elif best.value is not None:
            labels.append(f"{best.kind}:{best.value}")
        else:
            labels.append(best.kind)
    return labels


def cluster_purity(assignments: np.ndarray, labels: list[str]) -> float:
    """Mean over clusters of the majority-label fraction within the cluster."""
    assignments = np.asarray(assignments)
    fractions = []
    for cluster in np.unique(assignments):
        members = [labels[i] for i in np.nonzero(assignments == cluster)[0]]
        counts: dict[str, int] = {}
        for m in members:
            counts[m] = counts.get(m, 0) + 1
        fractions.append(max(counts.values()) / len(members))
    return float(np.mean(fractions))


def discover_attributes(features: np.ndarray, labels: list[str], k: int,
                        seed: int = 0) -> tuple[np.ndarray, float]:
    """k-means over object features; returns (assignments, purity)."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise ValueError("features must be [n, d]")
    if len(labels) != len(features):
        raise ValueError("label/feature length mismatch")
    if k > len(features):
        raise ValueError(f"k={k} exceeds sample count {len(features)}")
    from sklearn.cluster import KMeans

    km = KMeans(n_clusters=k, init="k-means++", n_init=10, random_state=seed)
    assignments = km.fit_predict(features)
    return assignments, cluster_purity(assignments, labels)
