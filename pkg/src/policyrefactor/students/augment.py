"""Training-time detection augmentation and degradation.

Augmentation adds a fraction of the sub-threshold proposals back into the
detection set, teaching the graph policy to ignore false positives.
Degradation simulates low-recall / low-precision detectors: each
detection is dropped i.i.d., and a number of false-positive boxes is
appended (drawn from a sub-threshold candidate pool when available,
synthesized otherwise).
"""

from __future__ import annotations

import math

import numpy as np

from ..detector.model import Detection
from ..envs.base import BBox
from ..rng import Pcg32


def _sample_without_replacement(pool_size: int, k: int, rng: Pcg32) -> list[int]:
    order = list(range(pool_size))
    rng.shuffle(order)
    return order[:k]


def augment_low_confidence(
    detections: list[Detection],
    candidates: list[Detection],
    rng: Pcg32,
    threshold: float = 0.1,
    fraction: float = 0.3,
) -> list[Detection]:
    """Append ceil(fraction * |sub-threshold pool|) random low-confidence
    proposals to the detections. Training-time only."""
    if fraction == 0.0:
        return list(detections)
    pool = [c for c in candidates if c.score < threshold]
    if not pool:
        return list(detections)
    k = math.ceil(fraction * len(pool))
    chosen = _sample_without_replacement(len(pool), k, rng)
    return list(detections) + [pool[i] for i in chosen]


def _synthetic_box(rng: Pcg32, nominal_size: float) -> BBox:
    # uniform center away from the border, size jittered around nominal
    x = (rng.next_below(8001) + 1000) / 10_000.0
    y = (rng.next_below(8001) + 1000) / 10_000.0
    scale = 0.75 + rng.next_below(51) / 100.0  # 0.75 .. 1.25
    s = min(max(nominal_size * scale, 1e-3), 1.0)
    return BBox(x_ctr=x, y_ctr=y, w=s, h=s)


def degrade_detections(
    detections: list[Detection],
    drop_rate: float,
    n_false_positives: int,
    rng: Pcg32,
    candidate_pool: list[Detection] | None = None,
    nominal_size: float = 0.08,
) -> list[Detection]:
    """Drop each detection i.i.d. and append false-positive boxes.

    False positives come from ``candidate_pool`` (sub-threshold proposals)
    when given; otherwise random boxes of roughly ``nominal_size`` are
    synthesized, standing in for proposals that are not real objects.
    """
    if not 0.0 <= drop_rate <= 1.0:
        raise ValueError(f"drop_rate must be in [0, 1], got {drop_rate}")
    if n_false_positives < 0:
        raise ValueError("n_false_positives must be >= 0")
    kept = [d for d in detections if not rng.next_bool(drop_rate)]
    if n_false_positives == 0:
        return kept
    fps: list[Detection] = []
    if candidate_pool:
        idx = [rng.next_below(len(candidate_pool)) for _ in range(n_false_positives)]
        fps = [candidate_pool[i] for i in idx]
    else:
        for _ in range(n_false_positives):
            fps.append(
                Detection(box=_synthetic_box(rng, nominal_size), score=0.05,
                          what=np.zeros(1), depth=0.0)
            )
    return kept + fps
