import { describe, expect, it } from "vitest";

import { ENV_PACMAN, EpisodeRecord, decodeRecord, encodeRecord } from "../src/record";

function sampleRecord(withFrames: boolean): EpisodeRecord {
  const frameBytes = 64 * 64 * 3;
  const steps = [0, 1, 2].map((t) => ({
    action: t,
    reward: t === 1 ? 0.99 : -0.01,
    done: t === 2,
    frame: withFrames
      ? new Uint8Array(frameBytes).map((_, i) => (i + t) & 0xff)
      : null,
  }));
  return { envId: ENV_PACMAN, seed: 123456789n, steps, hasFrames: withFrames };
}

describe("episode record codec", () => {
  it.each([true, false])("round-trips (frames=%s)", (withFrames) => {
    const record = sampleRecord(withFrames);
    const back = decodeRecord(encodeRecord(record));
    expect(back.envId).toBe(record.envId);
    expect(back.seed).toBe(record.seed);
    expect(back.hasFrames).toBe(withFrames);
    expect(back.steps.length).toBe(3);
    for (let t = 0; t < 3; t++) {
      expect(back.steps[t].action).toBe(record.steps[t].action);
      expect(back.steps[t].reward).toBeCloseTo(record.steps[t].reward, 6);
      expect(back.steps[t].done).toBe(record.steps[t].done);
      if (withFrames) {
        expect(Buffer.from(back.steps[t].frame!)).toEqual(
          Buffer.from(record.steps[t].frame!),
        );
      }
    }
  });

  it("writes the documented header layout", () => {
    const buf = encodeRecord(sampleRecord(false));
    expect(buf.toString("latin1", 0, 4)).toBe("PREC");
    expect(buf.readUInt16LE(4)).toBe(1);
    expect(buf.readUInt8(6)).toBe(ENV_PACMAN);
    expect(buf.readUInt8(7)).toBe(0);
    expect(buf.readBigUInt64LE(8)).toBe(123456789n);
    expect(buf.readUInt32LE(16)).toBe(3);
    expect(buf.length).toBe(20 + 3 * 6);
  });

  it("quantizes rewards to f32", () => {
    const back = decodeRecord(encodeRecord(sampleRecord(false)));
    expect(back.steps[1].reward).toBe(Math.fround(0.99));
  });

  it("rejects bad magic, bad version, and truncation", () => {
    const buf = encodeRecord(sampleRecord(false));
    const badMagic = Buffer.from(buf);
    badMagic.write("XXXX", 0, "latin1");
    expect(() => decodeRecord(badMagic)).toThrow(/magic/);
    const badVersion = Buffer.from(buf);
    badVersion.writeUInt16LE(9, 4);
    expect(() => decodeRecord(badVersion)).toThrow(/version/);
    expect(() => decodeRecord(buf.subarray(0, buf.length - 1))).toThrow(/length/);
  });
});
