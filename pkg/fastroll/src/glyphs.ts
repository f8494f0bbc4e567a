/**
 * Glyph atlas loader: magic "GLYA", version u16 LE, count u8, then per
 * glyph height/width u8 and row-major 0/1 bytes, closed by a CRC32 of all
 * preceding bytes. The atlas is exported once by the reference engine; no
 * glyph data is hardcoded here so the two engines can never drift.
 */

import * as fs from "node:fs";

export interface Glyph {
  h: number;
  w: number;
  mask: Uint8Array;
}

const CRC_TABLE = (() => {
  const table = new Uint32Array(256);
  for (let n = 0; n < 256; n++) {
    let c = n;
    for (let k = 0; k < 8; k++) {
      c = c & 1 ? (0xedb88320 ^ (c >>> 1)) >>> 0 : c >>> 1;
    }
    table[n] = c >>> 0;
  }
  return table;
})();

export function crc32(bytes: Uint8Array): number {
  let c = 0xffffffff;
  for (let i = 0; i < bytes.length; i++) {
    c = (CRC_TABLE[(c ^ bytes[i]) & 0xff] ^ (c >>> 8)) >>> 0;
  }
  return (c ^ 0xffffffff) >>> 0;
}

export function readAtlas(path: string): Glyph[] {
  const raw = fs.readFileSync(path);
  if (raw.length < 11 || raw.toString("latin1", 0, 4) !== "GLYA") {
    throw new Error(`${path}: not a glyph atlas (bad magic)`);
  }
  const stored = raw.readUInt32LE(raw.length - 4);
  if (stored !== crc32(raw.subarray(0, raw.length - 4))) {
    throw new Error(`${path}: atlas checksum mismatch`);
  }
  const version = raw.readUInt16LE(4);
  if (version !== 1) throw new Error(`${path}: unsupported atlas version ${version}`);
  const count = raw[6];
  const glyphs: Glyph[] = [];
  let offset = 7;
  for (let i = 0; i < count; i++) {
    const h = raw[offset];
    const w = raw[offset + 1];
    offset += 2;
    glyphs.push({ h, w, mask: new Uint8Array(raw.subarray(offset, offset + h * w)) });
    offset += h * w;
  }
  return glyphs;
}

/** (top, left, height, width) of the lit pixels. */
export function tightBounds(glyph: Glyph): [number, number, number, number] {
  let top = glyph.h, left = glyph.w, bottom = -1, right = -1;
  for (let y = 0; y < glyph.h; y++) {
    for (let x = 0; x < glyph.w; x++) {
      if (glyph.mask[y * glyph.w + x]) {
        if (y < top) top = y;
        if (y > bottom) bottom = y;
        if (x < left) left = x;
        if (x > right) right = x;
      }
    }
  }
  if (bottom < 0) throw new Error("glyph has no lit pixels");
  return [top, left, bottom - top + 1, right - left + 1];
}
