/**
 * Byte-level equivalence verification between two episode records (or two
 * directories of them). Structural header mismatches are errors; payload
 * divergence is located as (episode, step, field, byte offset).
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { FRAME_SIZES, decodeRecord } from "./record";

export interface Divergence {
  episode: number | string;
  step: number;
  field: "action" | "reward" | "done" | "frame" | "step_count";
  byteOffset: number;
}

export interface VerifyReport {
  identical: boolean;
  divergences: Divergence[];
  filesCompared: number;
}

const HEADER_BYTES = 20;
const STEP_FIXED = 6;

export function verifyRecords(refBuf: Buffer, fastBuf: Buffer,
                              episode: number | string = 0,
                              maxDivergences = 16): Divergence[] {
  const ref = decodeRecord(refBuf);
  const fast = decodeRecord(fastBuf);
  if (ref.envId !== fast.envId) {
    throw new Error(`env id mismatch: ${ref.envId} vs ${fast.envId}`);
  }
  if (ref.hasFrames !== fast.hasFrames) {
    throw new Error("structural mismatch: frame flag differs");
  }
  if (ref.seed !== fast.seed) {
    throw new Error(`seed mismatch: ${ref.seed} vs ${fast.seed}`);
  }
  const out: Divergence[] = [];
  const frameBytes = ref.hasFrames ? FRAME_SIZES[ref.envId] ** 2 * 3 : 0;
  const stepBytes = STEP_FIXED + frameBytes;
  if (ref.steps.length !== fast.steps.length) {
    out.push({ episode, step: Math.min(ref.steps.length, fast.steps.length),
               field: "step_count", byteOffset: 16 });
    return out;
  }
  for (let t = 0; t < ref.steps.length && out.length < maxDivergences; t++) {
    const base = HEADER_BYTES + t * stepBytes;
    const a = ref.steps[t];
    const b = fast.steps[t];
    if (a.action !== b.action) {
      out.push({ episode, step: t, field: "action", byteOffset: base });
    }
    if (refBuf.readUInt32LE(base + 1) !== fastBuf.readUInt32LE(base + 1)) {
      out.push({ episode, step: t, field: "reward", byteOffset: base + 1 });
    }
    if (a.done !== b.done) {
      out.push({ episode, step: t, field: "done", byteOffset: base + 5 });
    }
    if (ref.hasFrames) {
      const fa = a.frame!;
      const fb = b.frame!;
      for (let i = 0; i < frameBytes; i++) {
        if (fa[i] !== fb[i]) {
          out.push({ episode, step: t, field: "frame",
                     byteOffset: base + STEP_FIXED + i });
          break;
        }
      }
    }
  }
  return out;
}

function splitRecords(buf: Buffer): Buffer[] {
  const out: Buffer[] = [];
  let offset = 0;
  while (offset < buf.length) {
    if (buf.length - offset < HEADER_BYTES) {
      throw new Error(`truncated record header at offset ${offset}`);
    }
    const envId = buf.readUInt8(offset + 6);
    const hasFrames = (buf.readUInt8(offset + 7) & 1) === 1;
    const n = buf.readUInt32LE(offset + 16);
    const frameBytes = hasFrames ? FRAME_SIZES[envId] ** 2 * 3 : 0;
    const size = HEADER_BYTES + n * (STEP_FIXED + frameBytes);
    out.push(buf.subarray(offset, offset + size));
    offset += size;
  }
  return out;
}

function verifyFiles(refFile: string, fastFile: string,
                     prefix: string): Divergence[] {
  const refs = splitRecords(fs.readFileSync(refFile));
  const fasts = splitRecords(fs.readFileSync(fastFile));
  if (refs.length !== fasts.length) {
    throw new Error(
      `episode count mismatch in ${prefix}: ${refs.length} vs ${fasts.length}`);
  }
  const out: Divergence[] = [];
  for (let ep = 0; ep < refs.length; ep++) {
    const label = refs.length === 1 && prefix ? prefix : (prefix ? `${prefix}:${ep}` : ep);
    out.push(...verifyRecords(refs[ep], fasts[ep], label));
  }
  return out;
}

export function verifyPaths(refPath: string, fastPath: string): VerifyReport {
  const refStat = fs.statSync(refPath);
  const fastStat = fs.statSync(fastPath);
  if (refStat.isDirectory() !== fastStat.isDirectory()) {
    throw new Error("cannot compare a directory with a file");
  }
  const divergences: Divergence[] = [];
  let files = 0;
  if (refStat.isDirectory()) {
    const names = fs.readdirSync(refPath).filter((n) => n.endsWith(".prec")).sort();
    const fastNames = new Set(
      fs.readdirSync(fastPath).filter((n) => n.endsWith(".prec")));
    for (const name of names) {
      if (!fastNames.has(name)) {
        throw new Error(`missing episode file in second path: ${name}`);
      }
      divergences.push(...verifyFiles(path.join(refPath, name),
                                      path.join(fastPath, name), name));
      files += 1;
    }
  } else {
    divergences.push(...verifyFiles(refPath, fastPath, ""));
    files = 1;
  }
  return { identical: divergences.length === 0, divergences, filesCompared: files };
}
