/**
 * Episode record wire format v1, little-endian:
 *
 *   "PREC" | version u16 | env_id u8 | flags u8 (bit0 frames) | seed u64 |
 *   steps u32 | per step: action u8, reward f32, done u8,
 *   [H*W*3 raw RGB if the frames flag is set]
 *
 * The stored frame is the pre-action observation. Frame dimensions are
 * fixed by env_id (1 = pacman 64x64, 2 = falling digit 128x128).
 */

export const ENV_PACMAN = 1;
export const ENV_FALLING = 2;
export const FRAME_SIZES: Record<number, number> = { 1: 64, 2: 128 };

const HEADER_BYTES = 20;
const STEP_FIXED_BYTES = 6;

export interface StepData {
  action: number;
  reward: number;
  done: boolean;
  frame: Uint8Array | null;
}

export interface EpisodeRecord {
  envId: number;
  seed: bigint;
  steps: StepData[];
  hasFrames: boolean;
}

export function encodeRecord(record: EpisodeRecord): Buffer {
  const frameBytes = record.hasFrames
    ? FRAME_SIZES[record.envId] ** 2 * 3
    : 0;
  const total = HEADER_BYTES + record.steps.length * (STEP_FIXED_BYTES + frameBytes);
  const buf = Buffer.alloc(total);
  buf.write("PREC", 0, "latin1");
  buf.writeUInt16LE(1, 4);
  buf.writeUInt8(record.envId, 6);
  buf.writeUInt8(record.hasFrames ? 1 : 0, 7);
  buf.writeBigUInt64LE(record.seed & ((1n << 64n) - 1n), 8);
  buf.writeUInt32LE(record.steps.length, 16);
  let o = HEADER_BYTES;
  for (const step of record.steps) {
    buf.writeUInt8(step.action, o);
    buf.writeFloatLE(step.reward, o + 1);
    buf.writeUInt8(step.done ? 1 : 0, o + 5);
    o += STEP_FIXED_BYTES;
    if (record.hasFrames) {
      if (!step.frame || step.frame.length !== frameBytes) {
        throw new Error("frame missing or wrong size while frames flag is set");
      }
      buf.set(step.frame, o);
      o += frameBytes;
    }
  }
  return buf;
}

/** Decode a shard: one or more concatenated records in episode order. */
export function decodeRecordStream(buf: Buffer): EpisodeRecord[] {
  const records: EpisodeRecord[] = [];
  let offset = 0;
  while (offset < buf.length) {
    if (buf.length - offset < HEADER_BYTES) {
      throw new Error(`shard truncated inside a record header at ${offset}`);
    }
    const envId = buf.readUInt8(offset + 6);
    if (!(envId in FRAME_SIZES)) {
      throw new Error(`unknown env id ${envId} at shard offset ${offset}`);
    }
    const hasFrames = (buf.readUInt8(offset + 7) & 1) === 1;
    const n = buf.readUInt32LE(offset + 16);
    const frameBytes = hasFrames ? FRAME_SIZES[envId] ** 2 * 3 : 0;
    const size = HEADER_BYTES + n * (STEP_FIXED_BYTES + frameBytes);
    records.push(decodeRecord(buf.subarray(offset, offset + size)));
    offset += size;
  }
  return records;
}

export function decodeRecord(buf: Buffer): EpisodeRecord {
  if (buf.length < HEADER_BYTES) throw new Error("record truncated before header");
  if (buf.toString("latin1", 0, 4) !== "PREC") throw new Error("bad magic");
  const version = buf.readUInt16LE(4);
  if (version !== 1) throw new Error(`unsupported record version ${version}`);
  const envId = buf.readUInt8(6);
  if (!(envId in FRAME_SIZES)) throw new Error(`unknown env id ${envId}`);
  const hasFrames = (buf.readUInt8(7) & 1) === 1;
  const seed = buf.readBigUInt64LE(8);
  const n = buf.readUInt32LE(16);
  const frameBytes = hasFrames ? FRAME_SIZES[envId] ** 2 * 3 : 0;
  const expected = HEADER_BYTES + n * (STEP_FIXED_BYTES + frameBytes);
  if (buf.length !== expected) {
    throw new Error(`record length mismatch: expected ${expected}, got ${buf.length}`);
  }
  const steps: StepData[] = [];
  let o = HEADER_BYTES;
  for (let t = 0; t < n; t++) {
    const action = buf.readUInt8(o);
    const reward = buf.readFloatLE(o + 1);
    const done = buf.readUInt8(o + 5) === 1;
    o += STEP_FIXED_BYTES;
    let frame: Uint8Array | null = null;
    if (hasFrames) {
      frame = new Uint8Array(buf.subarray(o, o + frameBytes));
      o += frameBytes;
    }
    steps.push({ action, reward, done, frame });
  }
  return { envId, seed, steps, hasFrames };
}
