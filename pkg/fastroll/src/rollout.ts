/**
 * Batched episode generation: run the built-in heuristic teacher (or
 * replay a recorded action stream) and emit episode records. Per-episode
 * seeds follow the shared rule Pcg32(seed ^ episode, episode), so results
 * are independent of how episodes are distributed over workers.
 *
 * Output modes: a single shard file (records concatenated in episode
 * order, the throughput path) or one file per episode. The frames-off
 * hot loop encodes directly into a preallocated buffer; no per-step
 * objects are allocated.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { FallingRenderer, fallingHeuristic, fallingReset, fallingStep } from "./falling";
import { Glyph } from "./glyphs";
import { pacmanGreedy, pacmanReset, pacmanStep, renderPacman } from "./pacman";
import { ENV_FALLING, ENV_PACMAN, EpisodeRecord, FRAME_SIZES, StepData, decodeRecord, encodeRecord } from "./record";
import { BackgroundMode, Canvas } from "./render";
import { episodeRng } from "./rng";

export type EnvId = "pacman" | "falling_digit";
export type PolicySource = "heuristic" | "actions-file";

export interface EngineConfig {
  env: EnvId;
  episodes: number;
  seed: number;
  workers: number;
  objects: number;
  outDir: string;
  withFrames: boolean;
  background: BackgroundMode;
  policy: PolicySource;
  filePerEpisode?: boolean;
  actionsFile?: string;
  atlas?: Glyph[]; // required to render falling-digit frames
}

export interface EpisodeSummary {
  episode: number;
  steps: number;
  episodeReturn: number;
}

export interface EpisodeResult {
  summary: EpisodeSummary;
  encoded: Buffer;
}

const HEADER_BYTES = 20;
const STEP_FIXED = 6;
const MAX_EPISODE_STEPS = 100;

// the two games emit rewards from tiny fixed sets; precomputing their f32
// byte patterns keeps float encoding out of the hot loop
function f32Bytes(value: number): [number, number, number, number] {
  const scratch = Buffer.alloc(4);
  scratch.writeFloatLE(value, 0);
  return [scratch[0], scratch[1], scratch[2], scratch[3]];
}

const PAC_EAT = f32Bytes(0.99);
const PAC_MOVE = f32Bytes(-0.01);
const FALL_HIT = f32Bytes(1.0);
const FALL_MISS = f32Bytes(-1.0);
const FALL_NONE = f32Bytes(0.0);

function writeHeaderAt(buf: Buffer, at: number, envId: number, hasFrames: boolean,
                       seed: number, steps: number): void {
  buf.write("PREC", at, "latin1");
  buf.writeUInt16LE(1, at + 4);
  buf.writeUInt8(envId, at + 6);
  buf.writeUInt8(hasFrames ? 1 : 0, at + 7);
  buf.writeBigUInt64LE(BigInt(seed) & ((1n << 64n) - 1n), at + 8);
  buf.writeUInt32LE(steps, at + 16);
}

/** Frames-off fast path: simulate one episode and encode it into ``buf``
 * starting at ``start``. Returns [bytesWritten, steps, episodeReturn]. */
function encodeEpisodeInto(buf: Buffer, start: number, config: EngineConfig,
                           episode: number,
                           actionStream?: number[]): [number, number, number] {
  const rng = episodeRng(config.seed, episode);
  const envId = config.env === "pacman" ? ENV_PACMAN : ENV_FALLING;
  let o = start + HEADER_BYTES;
  let steps = 0;
  let episodeReturn = 0;

  if (config.env === "pacman") {
    const state = pacmanReset(config.objects, rng, config.background);
    while (!state.done) {
      const action = actionStream ? actionStream[steps] : pacmanGreedy(state);
      const reward = pacmanStep(state, action);
      const rb = reward > 0 ? PAC_EAT : PAC_MOVE;
      buf[o] = action;
      buf[o + 1] = rb[0];
      buf[o + 2] = rb[1];
      buf[o + 3] = rb[2];
      buf[o + 4] = rb[3];
      buf[o + 5] = state.done ? 1 : 0;
      o += STEP_FIXED;
      steps += 1;
      episodeReturn += reward;
      if (actionStream && steps >= actionStream.length) break;
    }
  } else {
    const state = fallingReset(config.objects, rng, config.background);
    while (!state.done) {
      const action = actionStream ? actionStream[steps] : fallingHeuristic(state);
      const reward = fallingStep(state, action, rng);
      const rb = reward === 0 ? FALL_NONE : reward > 0 ? FALL_HIT : FALL_MISS;
      buf[o] = action;
      buf[o + 1] = rb[0];
      buf[o + 2] = rb[1];
      buf[o + 3] = rb[2];
      buf[o + 4] = rb[3];
      buf[o + 5] = state.done ? 1 : 0;
      o += STEP_FIXED;
      steps += 1;
      episodeReturn += reward;
      if (actionStream && steps >= actionStream.length) break;
    }
  }
  writeHeaderAt(buf, start, envId, false, config.seed, steps);
  return [o - start, steps, episodeReturn];
}

function rolloutEncodedNoFrames(config: EngineConfig, episode: number,
                                actionStream?: number[]): EpisodeResult {
  const buf = Buffer.allocUnsafe(HEADER_BYTES + MAX_EPISODE_STEPS * STEP_FIXED);
  const [bytes, steps, episodeReturn] = encodeEpisodeInto(buf, 0, config, episode,
                                                          actionStream);
  return {
    summary: { episode, steps, episodeReturn },
    encoded: buf.subarray(0, bytes),
  };
}

/** Fused shard path: all episodes encoded into one preallocated buffer,
 * in the given (episode) order. */
export function rolloutShard(config: EngineConfig, episodes: number[],
                             actionStream?: number[]): {
  shard: Buffer;
  summaries: EpisodeSummary[];
} {
  const cap = episodes.length * (HEADER_BYTES + MAX_EPISODE_STEPS * STEP_FIXED);
  const buf = Buffer.allocUnsafe(cap);
  let offset = 0;
  const summaries: EpisodeSummary[] = [];
  for (const episode of episodes) {
    const [bytes, steps, episodeReturn] = encodeEpisodeInto(buf, offset, config,
                                                            episode, actionStream);
    offset += bytes;
    summaries.push({ episode, steps, episodeReturn });
  }
  return { shard: buf.subarray(0, offset), summaries };
}

export function runEpisode(config: EngineConfig, episode: number,
                           actionStream?: number[]): EpisodeRecord {
  if (!config.withFrames) {
    return decodeRecord(rolloutEncodedNoFrames(config, episode, actionStream).encoded);
  }
  const rng = episodeRng(config.seed, episode);
  const envId = config.env === "pacman" ? ENV_PACMAN : ENV_FALLING;
  const canvas = new Canvas(FRAME_SIZES[envId]);
  const steps: StepData[] = [];

  if (config.env === "pacman") {
    const state = pacmanReset(config.objects, rng, config.background);
    renderPacman(state, config.background, canvas);
    let t = 0;
    while (!state.done) {
      const action = actionStream ? actionStream[t] : pacmanGreedy(state);
      const frame = new Uint8Array(canvas.data);
      const reward = pacmanStep(state, action);
      renderPacman(state, config.background, canvas);
      steps.push({ action, reward, done: state.done, frame });
      t += 1;
      if (actionStream && t >= actionStream.length && !state.done) break;
    }
  } else {
    if (!config.atlas) {
      throw new Error("rendering falling-digit frames needs the glyph atlas");
    }
    const renderer = new FallingRenderer(config.atlas);
    const state = fallingReset(config.objects, rng, config.background);
    renderer.render(state, config.background, canvas);
    let t = 0;
    while (!state.done) {
      const action = actionStream ? actionStream[t] : fallingHeuristic(state);
      const frame = new Uint8Array(canvas.data);
      const reward = fallingStep(state, action, rng);
      renderer.render(state, config.background, canvas);
      steps.push({ action, reward, done: state.done, frame });
      t += 1;
      if (actionStream && t >= actionStream.length && !state.done) break;
    }
  }
  return { envId, seed: BigInt(config.seed), steps, hasFrames: true };
}

export function runEpisodeResult(config: EngineConfig, episode: number,
                                 actionStream?: number[]): EpisodeResult {
  if (!config.withFrames) {
    return rolloutEncodedNoFrames(config, episode, actionStream);
  }
  const record = runEpisode(config, episode, actionStream);
  return {
    summary: {
      episode,
      steps: record.steps.length,
      episodeReturn: record.steps.reduce((acc, s) => acc + s.reward, 0),
    },
    encoded: encodeRecord(record),
  };
}

export function loadActionStream(filePath: string): number[] {
  const record = decodeRecord(fs.readFileSync(filePath));
  return record.steps.map((s) => s.action);
}

export function recordPath(outDir: string, episode: number): string {
  return path.join(outDir, `ep_${episode.toString().padStart(5, "0")}.prec`);
}

export const SHARD_NAME = "records.prec";

/** Run a list of episodes; returns results in the given order. */
export function runEpisodeSlice(config: EngineConfig,
                                episodes: number[]): EpisodeResult[] {
  const actionStream = config.policy === "actions-file"
    ? loadActionStream(config.actionsFile ?? missingActionsFile())
    : undefined;
  return episodes.map((ep) => runEpisodeResult(config, ep, actionStream));
}

function missingActionsFile(): never {
  throw new Error("--actions-file is required for replay");
}

/** Write results: one shard in episode order, or one file per episode. */
export function writeResults(config: EngineConfig,
                             results: EpisodeResult[]): EpisodeSummary[] {
  fs.mkdirSync(config.outDir, { recursive: true });
  const ordered = [...results].sort((a, b) => a.summary.episode - b.summary.episode);
  if (config.filePerEpisode) {
    for (const r of ordered) {
      fs.writeFileSync(recordPath(config.outDir, r.summary.episode), r.encoded);
    }
  } else {
    fs.writeFileSync(path.join(config.outDir, SHARD_NAME),
                     Buffer.concat(ordered.map((r) => r.encoded)));
  }
  return ordered.map((r) => r.summary);
}

/** Single-threaded batch rollout (workers are orchestrated by the CLI). */
export function runEpisodeRange(config: EngineConfig,
                                episodes: number[]): EpisodeSummary[] {
  if (!config.withFrames && !config.filePerEpisode) {
    fs.mkdirSync(config.outDir, { recursive: true });
    const actionStream = config.policy === "actions-file"
      ? loadActionStream(config.actionsFile ?? missingActionsFile())
      : undefined;
    const ordered = [...episodes].sort((a, b) => a - b);
    const { shard, summaries } = rolloutShard(config, ordered, actionStream);
    fs.writeFileSync(path.join(config.outDir, SHARD_NAME), shard);
    return summaries;
  }
  return writeResults(config, runEpisodeSlice(config, episodes));
}
