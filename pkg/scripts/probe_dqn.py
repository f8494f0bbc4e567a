"""Calibration probe: desk-scale DQN teacher on the 2-dot game, then
greedy evaluation on 2 and 10 dots."""

import json
import sys
import time

import torch

sys.path.insert(0, "src")
torch.set_num_threads(1)

from policyrefactor.evals import QPolicy, eval_policy
from policyrefactor.rng import Pcg32
from policyrefactor.tasks import dqn_config, make_env_factory
from policyrefactor.teachers import dqn_train

steps = int(sys.argv[1]) if len(sys.argv) > 1 else 200_000

config = dqn_config("pacman", "desk")
config = type(config)(**{**config.__dict__, "total_steps": steps})
print("config:", config)

t0 = time.time()
result = dqn_train(make_env_factory("pacman", 2), config, Pcg32(424242))
dt = time.time() - t0
print(f"trained {steps} steps / {result.gradient_steps} grad steps in {dt / 60:.1f} min")
print("history:", json.dumps(result.history))
print(f"best eval return: {result.best_eval_return:.3f} "
      f"(threshold reached: {result.reached_threshold})")

policy = QPolicy(result.qfunction)
for dots in (2, 10):
    report = eval_policy(policy, make_env_factory("pacman", dots), 100, Pcg32(777))
    print(f"dots={dots}: mean={report.mean:.3f} stdev={report.stdev:.3f}")

from policyrefactor.teachers import save_teacher

save_teacher("/tmp/probe_teacher.pt", result.qfunction,
             extra={"best": result.best_eval_return})
print("saved /tmp/probe_teacher.pt")
