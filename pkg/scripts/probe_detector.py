"""Calibration probe: desk-scale detector training on black-background
digit-sum frames. Reports loss curve, recall@0.25, and s/step."""

import sys
import time

import numpy as np
import torch

sys.path.insert(0, "src")

from policyrefactor.detector import DetectorTrainConfig, PriorSchedule, SpaceConfig, train_detector
from policyrefactor.envs import box_iou, mmnist_generate, sample_digit_count
from policyrefactor.rng import Pcg32

torch.set_num_threads(2)

STEPS = int(sys.argv[1]) if len(sys.argv) > 1 else 1500
N_TRAIN = int(sys.argv[2]) if len(sys.argv) > 2 else 800
BATCH = int(sys.argv[3]) if len(sys.argv) > 3 else 16

rng = Pcg32(1234)
frames = []
gts = []
for i in range(N_TRAIN + 100):
    n = sample_digit_count(rng)
    frame, _, gt = mmnist_generate(n, rng=rng)
    frames.append(frame)
    gts.append(gt)
frames = np.stack(frames)
train_frames, eval_frames, eval_gts = frames[:N_TRAIN], frames[N_TRAIN:], gts[N_TRAIN:]

space = SpaceConfig(
    image_size=54,
    grid=(6, 6),
    glimpse_size=14,
    z_what_dim=12,
    anchor_size=0.2,
    enc_plan=((16, 1), (16, 3), (32, 1), (32, 3), (48, 1)),
    enc_head_channels=48,
    glimpse_hidden=96,
    norm_groups=8,
    background=False,
    priors=PriorSchedule(
        pres_prior=(0.1, 0.01, STEPS // 10, STEPS // 2),
        temperature=(2.0, 0.5, STEPS // 10, STEPS // 2),
    ),
)
tc = DetectorTrainConfig(steps=STEPS, batch_size=BATCH, log_every=100)

t0 = time.time()
result = train_detector(train_frames, space, tc, Pcg32(7))
dt = time.time() - t0
print(f"trained {STEPS} steps in {dt:.1f}s ({dt / STEPS * 1000:.1f} ms/step)")
for h in result.history[:3] + result.history[-3:]:
    print({k: round(v, 1) for k, v in h.items()})

model = result.model
matched = total = n_det = 0
for frame, gt in zip(eval_frames, eval_gts):
    dets = model.detect(frame, 0.1)
    n_det += len(dets)
    used = set()
    for obj in gt:
        total += 1
        best, best_iou = None, 0.25
        for k, d in enumerate(dets):
            if k in used:
                continue
            iou = box_iou(d.box, obj.box)
            if iou >= best_iou:
                best, best_iou = k, iou
        if best is not None:
            used.add(best)
            matched += 1
print(f"recall@0.25 = {matched}/{total} = {matched / total:.3f}; "
      f"mean detections/frame = {n_det / len(eval_frames):.1f}")
