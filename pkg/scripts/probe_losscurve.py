"""Probe the early loss-curve shape on textured-background digit scenes:
disjoint 50-step window means over the first 2K steps."""

import sys

import numpy as np
import torch

sys.path.insert(0, "src")
torch.set_num_threads(1)

from policyrefactor.detector import DetectorTrainConfig, train_detector
from policyrefactor.envs import mmnist_generate, sample_digit_count
from policyrefactor.envs.backgrounds import BackgroundSource
from policyrefactor.rng import Pcg32
from policyrefactor.tasks import detector_space_config

rng = Pcg32(5150)
bg = BackgroundSource("textured")
frames = []
for _ in range(600):
    frame, _, _ = mmnist_generate(sample_digit_count(rng), bg, rng)
    frames.append(frame)
frames = np.stack(frames)

space = detector_space_config("multi_mnist", "desk", background=True)
tc = DetectorTrainConfig(steps=2000, batch_size=8, log_every=1)
result = train_detector(frames, space, tc, Pcg32(99))

losses = np.array([h["loss"] for h in result.history])
windows = losses[: 2000 // 50 * 50].reshape(-1, 50).mean(axis=1)
print("window means:", [round(float(w), 1) for w in windows])
diffs = np.diff(windows)
print("max increase between consecutive windows:", float(diffs.max()))
print("monotone non-increasing:", bool((diffs <= 0).all()))
