/**
 * Integer-only rasterization, byte-identical to the reference renderer:
 * solid fills, glyph blits from the shared atlas, and the seeded
 * value-noise texture (lowbias32 hash mixing, all mod 2^32).
 */

export class Canvas {
  readonly data: Uint8Array;

  constructor(readonly size: number) {
    this.data = new Uint8Array(size * size * 3);
  }

  clear(): void {
    this.data.fill(0);
  }

  fillRect(top: number, left: number, h: number, w: number,
           r: number, g: number, b: number): void {
    for (let y = top; y < top + h; y++) {
      let o = (y * this.size + left) * 3;
      for (let x = 0; x < w; x++) {
        this.data[o] = r;
        this.data[o + 1] = g;
        this.data[o + 2] = b;
        o += 3;
      }
    }
  }

  blitMask(mask: Uint8Array, maskH: number, maskW: number, top: number, left: number,
           scale: number, r: number, g: number, b: number): void {
    for (let gy = 0; gy < maskH; gy++) {
      for (let gx = 0; gx < maskW; gx++) {
        if (!mask[gy * maskW + gx]) continue;
        const y0 = top + gy * scale;
        const x0 = left + gx * scale;
        for (let y = y0; y < y0 + scale; y++) {
          let o = (y * this.size + x0) * 3;
          for (let x = 0; x < scale; x++) {
            this.data[o] = r;
            this.data[o + 1] = g;
            this.data[o + 2] = b;
            o += 3;
          }
        }
      }
    }
  }
}

function hash32(x: number): number {
  x = x >>> 0;
  x ^= x >>> 16;
  x = Math.imul(x, 0x7feb352d) >>> 0;
  x ^= x >>> 15;
  x = Math.imul(x, 0x846ca68b) >>> 0;
  x ^= x >>> 16;
  return x >>> 0;
}

export function textureFill(canvas: Canvas, seed: number, block: number): void {
  const size = canvas.size;
  const blockHash = hash32(seed >>> 0);
  for (let y = 0; y < size; y++) {
    const by = Math.floor(y / block);
    for (let x = 0; x < size; x++) {
      const bx = Math.floor(x / block);
      // products stay below 2^53, so the u32 coercion is exact
      const key = (bx * 0x9e3779b1 + by * 0x85ebca77) >>> 0;
      const cell = hash32((blockHash ^ key) >>> 0);
      const pkey = (x * 0xc2b2ae35 + y * 0x27d4eb2f) >>> 0;
      const jitter = hash32((blockHash ^ pkey ^ 0x5eed5eed) >>> 0);
      const d = (jitter & 31) - 16;
      const o = (y * size + x) * 3;
      const r = 40 + (cell & 0x7f) + d;
      const g = 40 + ((cell >>> 8) & 0x7f) + d;
      const b = 40 + ((cell >>> 16) & 0x7f) + d;
      canvas.data[o] = r < 0 ? 0 : r > 255 ? 255 : r;
      canvas.data[o + 1] = g < 0 ? 0 : g > 255 ? 255 : g;
      canvas.data[o + 2] = b < 0 ? 0 : b > 255 ? 255 : b;
    }
  }
}

export type BackgroundMode = "black" | "textured";
