"""Reference-engine rollout throughput: heuristic episodes encoded into a
single record shard, frames off. Prints a JSON line with steps/s; the
accelerated engine's benchmark consumes it for the speedup comparison.

Usage: python scripts/bench_reference_rollouts.py [episodes] [seed] [out_dir]
"""

import json
import sys
import time
from pathlib import Path

from policyrefactor.envs import PacmanEnv, rollout_record, write_record_stream
from policyrefactor.rng import episode_rng
from policyrefactor.teachers import pacman_greedy

episodes = int(sys.argv[1]) if len(sys.argv) > 1 else 1000
seed = int(sys.argv[2]) if len(sys.argv) > 2 else 0
out_dir = Path(sys.argv[3]) if len(sys.argv) > 3 else Path("/tmp/refbench")
out_dir.mkdir(parents=True, exist_ok=True)

policy = lambda env, obs: pacman_greedy(env.state)
total_steps = 0
records = []
t0 = time.perf_counter()
for ep in range(episodes):
    env = PacmanEnv(n_dots=2, render=False)
    record = rollout_record(env, policy, episode_rng(seed, ep), seed=seed,
                            with_frames=False)
    records.append(record)
    total_steps += len(record.actions)
write_record_stream(str(out_dir / "records.prec"), records)
elapsed = time.perf_counter() - t0
print(json.dumps({
    "engine": "reference",
    "episodes": episodes,
    "total_steps": total_steps,
    "elapsed_seconds": elapsed,
    "steps_per_second": total_steps / elapsed,
}))
