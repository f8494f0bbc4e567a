"""Calibration probe for the student-training acceptance runs."""

import sys
import time

import numpy as np
import torch

sys.path.insert(0, "src")
torch.set_num_threads(1)

from policyrefactor.demos import collect, label_multi_mnist
from policyrefactor.evals import (
    StudentPipelinePolicy,
    accuracy_multi_mnist,
    eval_policy,
    predict_dataset,
)
from policyrefactor.rng import Pcg32
from policyrefactor.students import GtBoxSource, StudentTrainConfig, train_student
from policyrefactor.tasks import make_env_factory, student_spec
from policyrefactor.teachers import PacmanGreedyTeacher

which = sys.argv[1] if len(sys.argv) > 1 else "pacman"

if which == "pacman":
    n_frames = int(sys.argv[2]) if len(sys.argv) > 2 else 12_000
    steps = int(sys.argv[3]) if len(sys.argv) > 3 else 6_000
    t0 = time.time()
    demos = collect(make_env_factory("pacman", 2), PacmanGreedyTeacher(),
                    n_frames, epsilon=0.0, rng=Pcg32(101))
    print(f"collected {len(demos)} frames in {time.time() - t0:.1f}s")

    spec = student_spec("pacman", "gnn", "desk")
    config = StudentTrainConfig(steps=steps, batch_size=64, learning_rate=1e-3,
                                val_fraction=0.1, eval_every=1000, log_every=200)
    t0 = time.time()
    result = train_student(demos, spec, GtBoxSource(demos), config, Pcg32(102))
    dt = time.time() - t0
    print(f"trained {steps} steps in {dt:.1f}s ({dt / steps * 1000:.1f} ms/step); "
          f"best val {result.best_val_loss:.4f}")
    for h in result.history[-4:]:
        print(h)

    policy = StudentPipelinePolicy(result.policy, box_source="gt")
    for dots in (2, 5, 10):
        t0 = time.time()
        report = eval_policy(policy, make_env_factory("pacman", dots), 100, Pcg32(103))
        print(f"dots={dots}: mean={report.mean:.3f} stdev={report.stdev:.3f} "
              f"({time.time() - t0:.0f}s)")

elif which == "mm":
    n_train = int(sys.argv[2]) if len(sys.argv) > 2 else 6_000
    steps = int(sys.argv[3]) if len(sys.argv) > 3 else 3_000
    t0 = time.time()
    train_set = label_multi_mnist(n_train, Pcg32(201))
    test_set = label_multi_mnist(1_000, Pcg32(202), fixed_digits=4)
    print(f"datasets in {time.time() - t0:.1f}s")

    for arch in ("gnn", "cnn"):
        spec = student_spec("multi_mnist", arch, "desk")
        config = StudentTrainConfig(steps=steps, batch_size=64, learning_rate=1e-3,
                                    val_fraction=0.1, eval_every=1000, log_every=500)
        t0 = time.time()
        result = train_student(train_set, spec,
                               GtBoxSource(train_set) if arch == "gnn" else None,
                               config, Pcg32(203))
        dt = time.time() - t0
        train_pred = predict_dataset(result.policy, train_set.subset(np.arange(1000)),
                                     box_source="gt")
        test_pred = predict_dataset(result.policy, test_set, box_source="gt")
        train_acc = accuracy_multi_mnist(train_pred[:, 0],
                                         train_set.targets[:1000, 0])
        test_acc = accuracy_multi_mnist(test_pred[:, 0], test_set.targets[:, 0])
        print(f"{arch}: {dt:.0f}s ({dt / steps * 1000:.0f} ms/step) "
              f"train_acc={train_acc:.3f} test4_acc={test_acc:.3f}")

elif which == "dp":
    n = int(sys.argv[2]) if len(sys.argv) > 2 else 3_000
    steps = int(sys.argv[3]) if len(sys.argv) > 3 else 2_500
    ds = label_multi_mnist(n, Pcg32(301))
    corrupt = np.zeros(n, dtype=bool)
    corrupt[: n // 10] = True  # 10%: remove all task-relevant detections
    order = np.random.default_rng(0).permutation(n)
    corrupt = corrupt[order]
    gt = [([] if corrupt[i] else ds.gt[i]) for i in range(n)]
    ds_corrupted = ds
    ds_corrupted.gt = gt

    spec = student_spec("multi_mnist", "gnn", "desk")
    config = StudentTrainConfig(steps=steps, batch_size=64, learning_rate=1e-3,
                                data_parameters=True, sigma_lr=0.1,
                                val_fraction=0.0, eval_every=10_000, log_every=500)
    t0 = time.time()
    result = train_student(ds_corrupted, spec, GtBoxSource(ds_corrupted), config,
                           Pcg32(302))
    print(f"trained in {time.time() - t0:.0f}s")
    sig = result.sigmas
    med_c = float(np.median(sig[corrupt]))
    med_ok = float(np.median(sig[~corrupt]))
    print(f"median sigma corrupted={med_c:.4f} clean={med_ok:.4f} "
          f"(separation {med_ok - med_c:.4f})")
