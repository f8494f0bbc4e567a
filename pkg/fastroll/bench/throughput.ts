/**
 * Throughput comparison: this engine vs the reference engine, identical
 * workload (dot-game heuristic episodes to record files, frames off).
 *
 *   node dist/bench/throughput.js [episodes] [seed]
 *
 * The reference side runs `python3 scripts/bench_reference_rollouts.py`
 * from the repository root.
 */

import { execFileSync } from "node:child_process";
import * as fs from "node:fs";
import * as path from "node:path";

import { runEpisodeRange } from "../src/rollout";

const episodes = Number(process.argv[2] ?? 1000);
const seed = Number(process.argv[3] ?? 0);

function findRepoRoot(start: string): string {
  let dir = start;
  for (let i = 0; i < 6; i++) {
    if (fs.existsSync(path.join(dir, "scripts", "bench_reference_rollouts.py"))) {
      return dir;
    }
    dir = path.dirname(dir);
  }
  throw new Error("could not locate the repository root from " + start);
}

const repoRoot = findRepoRoot(__dirname);

export interface BenchResult {
  fastStepsPerSecond: number;
  referenceStepsPerSecond: number;
  speedup: number;
}

export function runBench(nEpisodes: number, benchSeed: number): BenchResult {
  const outDir = fs.mkdtempSync("/tmp/fastroll-bench-");
  const makeConfig = (episodes: number) => ({
    env: "pacman" as const,
    episodes,
    seed: benchSeed,
    workers: 1,
    objects: 2,
    outDir,
    withFrames: false,
    background: "black" as const,
    policy: "heuristic" as const,
  });
  // warm the JIT, then take the best of three measured rounds; the
  // reference gets the same best-of-rounds treatment
  const warmup = Math.max(500, Math.floor(nEpisodes / 2));
  runEpisodeRange(makeConfig(warmup), Array.from({ length: warmup }, (_, i) => i));

  let fast = 0;
  for (let round = 0; round < 3; round++) {
    const t0 = process.hrtime.bigint();
    const summaries = runEpisodeRange(
      makeConfig(nEpisodes),
      Array.from({ length: nEpisodes }, (_, i) => i),
    );
    const elapsed = Number(process.hrtime.bigint() - t0) / 1e9;
    const totalSteps = summaries.reduce((acc, s) => acc + s.steps, 0);
    fast = Math.max(fast, totalSteps / elapsed);
  }

  let reference = 0;
  const refOut = fs.mkdtempSync("/tmp/refroll-bench-");
  for (let round = 0; round < 3; round++) {
    const stdout = execFileSync(
      "python3",
      ["scripts/bench_reference_rollouts.py", String(nEpisodes), String(benchSeed), refOut],
      { cwd: repoRoot, encoding: "utf-8" },
    );
    const parsed = JSON.parse(stdout.trim().split("\n").pop()!) as {
      steps_per_second: number;
    };
    reference = Math.max(reference, parsed.steps_per_second);
  }
  fs.rmSync(outDir, { recursive: true, force: true });
  fs.rmSync(refOut, { recursive: true, force: true });
  return {
    fastStepsPerSecond: fast,
    referenceStepsPerSecond: reference,
    speedup: fast / reference,
  };
}

if (require.main === module) {
  const result = runBench(episodes, seed);
  console.log(
    `fast:      ${Math.round(result.fastStepsPerSecond).toLocaleString()} steps/s\n` +
    `reference: ${Math.round(result.referenceStepsPerSecond).toLocaleString()} steps/s\n` +
    `speedup:   ${result.speedup.toFixed(1)}x`,
  );
}
