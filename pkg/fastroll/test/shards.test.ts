/**
 * Shard output: records concatenated in episode order, byte-identical to
 * the reference engine's shard writer and independent of worker count.
 */

import { execFileSync } from "node:child_process";
import * as fs from "node:fs";
import * as path from "node:path";
import { beforeAll, describe, expect, it } from "vitest";

import { decodeRecordStream } from "../src/record";
import { runEpisodeRange } from "../src/rollout";

const repoRoot = path.resolve(__dirname, "..", "..");
const distCli = path.resolve(__dirname, "..", "dist", "src", "cli.js");
const work = fs.mkdtempSync("/tmp/fastroll-shard-");

beforeAll(() => {
  if (!fs.existsSync(distCli)) {
    execFileSync("npx", ["tsc", "-p", "tsconfig.json"],
                 { cwd: path.resolve(__dirname, "..") });
  }
}, 120_000);

describe("shards", () => {
  it("matches the reference engine's shard byte-for-byte", () => {
    const refShard = path.join(work, "ref.prec");
    execFileSync("python3", ["-c", `
from policyrefactor.envs import PacmanEnv, rollout_record, write_record_stream
from policyrefactor.rng import episode_rng
from policyrefactor.teachers import pacman_greedy
records = []
for ep in range(25):
    env = PacmanEnv(n_dots=3, render=False)
    records.append(rollout_record(env, lambda e, o: pacman_greedy(e.state),
                                  episode_rng(31, ep), seed=31, with_frames=False))
write_record_stream(${JSON.stringify(refShard)}, records)
`], { cwd: repoRoot });

    const outDir = path.join(work, "fast");
    runEpisodeRange(
      {
        env: "pacman",
        episodes: 25,
        seed: 31,
        workers: 1,
        objects: 3,
        outDir,
        withFrames: false,
        background: "black",
        policy: "heuristic",
      },
      Array.from({ length: 25 }, (_, i) => i),
    );
    const ours = fs.readFileSync(path.join(outDir, "records.prec"));
    const reference = fs.readFileSync(refShard);
    expect(ours.equals(reference)).toBe(true);
    expect(decodeRecordStream(ours)).toHaveLength(25);
  }, 60_000);

  it("is byte-identical regardless of worker count", () => {
    const run = (workers: number, dir: string) => {
      execFileSync("node", [distCli, "rollout", "--env", "falling_digit",
                            "--episodes", "12", "--seed", "9", "--objects", "3",
                            "--workers", String(workers), "--no-frames",
                            "--out", dir]);
      return fs.readFileSync(path.join(dir, "records.prec"));
    };
    const one = run(1, path.join(work, "w1"));
    const three = run(3, path.join(work, "w3"));
    expect(one.equals(three)).toBe(true);
  }, 60_000);
});
