"""Detection metrics: greedy IoU matching, recall, and average precision."""

from __future__ import annotations

import numpy as np

from ..envs.base import box_iou


def match_detections(detections, gt, iou_threshold: float = 0.25):
    """Greedy matching by descending score; each ground-truth object is
    matched at most once. Returns (tp_flags aligned with the sorted
    detections, matched gt count, sorted detections)."""
    order = sorted(range(len(detections)), key=lambda i: -detections[i].score)
    matched: set[int] = set()
    tp = np.zeros(len(detections), dtype=bool)
    for rank, di in enumerate(order):
        det = detections[di]
        best_j, best_iou = None, iou_threshold
        for j, obj in enumerate(gt):
            if j in matched:
                continue
            iou = box_iou(det.box, obj.box)
            if iou >= best_iou:
                best_j, best_iou = j, iou
        if best_j is not None:
            matched.add(best_j)
            tp[rank] = True
    return tp, len(matched), [detections[i] for i in order]


def average_precision(tp_sorted: np.ndarray, n_gt: int) -> float:
    """Area under the precision-recall curve, all-points interpolation."""
    if n_gt == 0:
        return 0.0
    if len(tp_sorted) == 0:
        return 0.0
    tp_cum = np.cumsum(tp_sorted)
    fp_cum = np.cumsum(~tp_sorted)
    recall = tp_cum / n_gt
    precision = tp_cum / (tp_cum + fp_cum)
    # precision envelope (monotone non-increasing from the right)
    for i in range(len(precision) - 2, -1, -1):
        precision[i] = max(precision[i], precision[i + 1])
    ap = 0.0
    prev_r = 0.0
    for r, p in zip(recall, precision):
        ap += (r - prev_r) * p
        prev_r = r
    return float(ap)


def detection_metrics(detections_per_frame, gt_per_frame,
                      iou_threshold: float = 0.25) -> tuple[float, float]:
    """(recall, average precision) across frames at one IoU threshold.

    Detections are pooled into a single ranked list by score (per-frame
    matching, global ranking), the usual single-class protocol.
    """
    if len(detections_per_frame) != len(gt_per_frame):
        raise ValueError("frame count mismatch")
    scores, tps = [], []
    n_gt = 0
    n_matched = 0
    for dets, gt in zip(detections_per_frame, gt_per_frame):
        tp, matched, ordered = match_detections(dets, gt, iou_threshold)
        n_gt += len(gt)
        n_matched += matched
        scores.extend(d.score for d in ordered)
        tps.extend(tp.tolist())
    if n_gt == 0:
        return 0.0, 0.0
    recall = n_matched / n_gt
    order = np.argsort([-s for s in scores], kind="stable")
    tp_sorted = np.array(tps, dtype=bool)[order]
    return float(recall), average_precision(tp_sorted, n_gt)
