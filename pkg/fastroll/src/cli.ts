#!/usr/bin/env node
/**
 * fastroll: generate, replay, and verify episode records.
 *
 *   fastroll rollout --env pacman --episodes 1000 --seed 7 --out out/
 *            [--objects 2] [--workers 2] [--policy heuristic|replay]
 *            [--actions-file ep.prec] [--no-frames] [--background black|textured]
 *            [--atlas atlas.glya]
 *   fastroll verify <reference> <candidate>
 *
 * Episode records are bit-exact with the reference engine for the same
 * seed and configuration.
 */

import * as fs from "node:fs";
import * as path from "node:path";
import { Worker } from "node:worker_threads";

import { readAtlas } from "./glyphs";
import {
  EngineConfig,
  EpisodeResult,
  EpisodeSummary,
  runEpisodeRange,
  runEpisodeSlice,
  writeResults,
} from "./rollout";
import { verifyPaths } from "./verify";

interface Flags {
  [key: string]: string | boolean;
}

function parseFlags(argv: string[]): { positional: string[]; flags: Flags } {
  const positional: string[] = [];
  const flags: Flags = {};
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (arg.startsWith("--")) {
      const name = arg.slice(2);
      if (i + 1 < argv.length && !argv[i + 1].startsWith("--")) {
        flags[name] = argv[++i];
      } else {
        flags[name] = true;
      }
    } else {
      positional.push(arg);
    }
  }
  return { positional, flags };
}

function intFlag(flags: Flags, name: string, fallback: number): number {
  if (!(name in flags)) return fallback;
  const value = Number(flags[name]);
  if (!Number.isInteger(value)) throw new Error(`--${name} must be an integer`);
  return value;
}

async function rollout(flags: Flags): Promise<number> {
  const env = (flags["env"] as string) ?? "pacman";
  if (env !== "pacman" && env !== "falling_digit") {
    throw new Error(`unknown env ${env}; expected pacman or falling_digit`);
  }
  const withFrames = !flags["no-frames"];
  const background = ((flags["background"] as string) ?? "black") as "black" | "textured";
  if (background !== "black" && background !== "textured") {
    throw new Error(`unknown background ${background}`);
  }
  const policyFlag = (flags["policy"] as string) ?? "heuristic";
  if (policyFlag !== "heuristic" && policyFlag !== "replay") {
    throw new Error(`unknown policy ${policyFlag}; expected heuristic or replay`);
  }
  const atlasPath = flags["atlas"] as string | undefined;
  const config: EngineConfig = {
    env,
    episodes: intFlag(flags, "episodes", 1),
    seed: intFlag(flags, "seed", 0),
    workers: Math.max(1, intFlag(flags, "workers", 1)),
    objects: intFlag(flags, "objects", env === "pacman" ? 2 : 3),
    outDir: (flags["out"] as string) ?? "fastroll-out",
    withFrames,
    background,
    policy: policyFlag === "replay" ? "actions-file" : "heuristic",
    filePerEpisode: Boolean(flags["file-per-episode"]),
    actionsFile: flags["actions-file"] as string | undefined,
    atlas: undefined,
  };
  if (config.env === "falling_digit" && config.withFrames) {
    if (!atlasPath) throw new Error("--atlas is required to render falling-digit frames");
    config.atlas = readAtlas(atlasPath);
  }

  const t0 = process.hrtime.bigint();
  const allEpisodes = Array.from({ length: config.episodes }, (_, i) => i);
  if (config.workers <= 1 || config.episodes <= 1) {
    const summaries = runEpisodeRange(config, allEpisodes);
    return finish(config, summaries, t0);
  }
  let results: EpisodeResult[];
  {
    // round-robin episode slices; output is merged in episode order, so
    // results never depend on worker scheduling
    const slices: number[][] = Array.from({ length: config.workers }, () => []);
    for (let ep = 0; ep < config.episodes; ep++) {
      slices[ep % config.workers].push(ep);
    }
    const workerPath = path.join(__dirname, "worker.js");
    const sliceResults = await Promise.all(
      slices.filter((s) => s.length).map(
        (episodes) =>
          new Promise<EpisodeResult[]>((resolve, reject) => {
            const worker = new Worker(workerPath, {
              workerData: { config: { ...config, atlas: undefined, atlasPath },
                            episodes },
            });
            worker.once("message", (raw: Array<{ summary: EpisodeSummary; encoded: Uint8Array }>) => {
              resolve(raw.map((r) => ({ summary: r.summary,
                                        encoded: Buffer.from(r.encoded) })));
            });
            worker.once("error", reject);
          }),
      ),
    );
    results = sliceResults.flat();
  }
  const summaries = writeResults(config, results);
  return finish(config, summaries, t0);
}

function finish(config: EngineConfig, summaries: EpisodeSummary[],
                t0: bigint): number {
  const elapsed = Number(process.hrtime.bigint() - t0) / 1e9;
  const totalSteps = summaries.reduce((acc, s) => acc + s.steps, 0);
  const meanReturn = summaries.reduce((acc, s) => acc + s.episodeReturn, 0) /
    summaries.length;

  const summaryPath = path.join(config.outDir, "summary.json");
  fs.writeFileSync(summaryPath, JSON.stringify({
    env: config.env,
    episodes: summaries.length,
    seed: config.seed,
    objects: config.objects,
    background: config.background,
    with_frames: config.withFrames,
    total_steps: totalSteps,
    steps_per_second: totalSteps / elapsed,
    elapsed_seconds: elapsed,
    mean_return: meanReturn,
    returns: summaries.map((s) => s.episodeReturn),
  }, null, 2));
  console.log(`${summaries.length} episodes, ${totalSteps} steps in ` +
              `${elapsed.toFixed(3)}s (${Math.round(totalSteps / elapsed)} steps/s), ` +
              `mean return ${meanReturn.toFixed(3)}`);
  return 0;
}

function verify(positional: string[]): number {
  if (positional.length !== 2) {
    console.error("usage: fastroll verify <reference> <candidate>");
    return 2;
  }
  const report = verifyPaths(positional[0], positional[1]);
  if (report.identical) {
    console.log(`identical (${report.filesCompared} file(s) compared)`);
    return 0;
  }
  for (const d of report.divergences) {
    console.error(`divergence: episode=${d.episode} step=${d.step} ` +
                  `field=${d.field} byte=${d.byteOffset}`);
  }
  return 1;
}

async function main(): Promise<number> {
  const [, , command, ...rest] = process.argv;
  const { positional, flags } = parseFlags(rest);
  try {
    if (command === "rollout") return await rollout(flags);
    if (command === "verify") return verify(positional);
    console.error("usage: fastroll <rollout|verify> [flags]");
    return 2;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }
}

main().then((code) => process.exit(code));
