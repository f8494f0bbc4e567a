/**
 * PCG-XSH-RR 32-bit generator, bit-identical to the reference engine.
 *
 * The 64-bit state is kept as two u32 limbs with exact double-precision
 * carry arithmetic (all intermediates stay below 2^53), so draws cost a
 * handful of integer ops instead of BigInt allocations. The bounded draw
 * uses the classic PCG rejection loop; reproducing an episode requires
 * reproducing this exact sequence.
 *
 * Per-episode derivation rule (shared across engines): episode i of a run
 * seeded with base uses Pcg32(base ^ i, i).
 */

const MULT_HI = 0x5851f42d;
const MULT_LO = 0x4c957f2d;
const TWO32 = 4294967296;

function hiLimb(value: bigint | number): number {
  if (typeof value === "number") {
    if (!Number.isSafeInteger(value) || value < 0) {
      throw new RangeError(`seed/stream must be a non-negative safe integer, got ${value}`);
    }
    return Math.floor(value / TWO32) >>> 0;
  }
  return Number((value >> 32n) & 0xffffffffn);
}

function loLimb(value: bigint | number): number {
  if (typeof value === "number") {
    return value >>> 0;
  }
  return Number(value & 0xffffffffn);
}

export class Pcg32 {
  private hi = 0;
  private lo = 0;
  private readonly incHi: number;
  private readonly incLo: number;

  constructor(seed: bigint | number, stream: bigint | number = 0) {
    const sHi = hiLimb(stream);
    const sLo = loLimb(stream);
    this.incHi = ((sHi << 1) | (sLo >>> 31)) >>> 0;
    this.incLo = ((sLo << 1) | 1) >>> 0;
    this.nextU32();
    const seedHi = hiLimb(seed);
    const seedLo = loLimb(seed);
    const lo = this.lo + seedLo;
    this.lo = lo >>> 0;
    this.hi = (this.hi + seedHi + (lo >= TWO32 ? 1 : 0)) >>> 0;
    this.nextU32();
  }

  nextU32(): number {
    const oldHi = this.hi;
    const oldLo = this.lo;

    // state = old * MULT + inc  (mod 2^64)
    const aL = oldLo & 0xffff;
    const aH = oldLo >>> 16;
    const ll = aL * 0x7f2d; // MULT_LO low 16
    const lh = aL * 0x4c95; // MULT_LO high 16
    const hl = aH * 0x7f2d;
    const hh = aH * 0x4c95;
    const mid = lh + hl; // < 2^33, exact as double
    const lowSum = ll + (mid % 65536) * 65536; // < 2^33, exact
    const prodLo = lowSum >>> 0;
    const carry = lowSum >= TWO32 ? 1 : 0;
    const hiOfLow = (hh + Math.floor(mid / 65536) + carry) >>> 0;
    const prodHi = (hiOfLow + Math.imul(oldLo, MULT_HI) + Math.imul(oldHi, MULT_LO)) >>> 0;

    const newLoSum = prodLo + this.incLo;
    this.lo = newLoSum >>> 0;
    this.hi = (prodHi + this.incHi + (newLoSum >= TWO32 ? 1 : 0)) >>> 0;

    // output from the pre-advance state: rotr32((old ^ (old >> 18)) >> 27, old >> 59)
    const xHi = ((oldHi >>> 18) ^ oldHi) >>> 0;
    const xLo = ((((oldHi << 14) | (oldLo >>> 18)) >>> 0) ^ oldLo) >>> 0;
    const xorshifted = ((xLo >>> 27) | (xHi << 5)) >>> 0;
    const rot = oldHi >>> 27;
    return ((xorshifted >>> rot) | (xorshifted << ((-rot) & 31))) >>> 0;
  }

  /** Uniform integer in [0, bound) via threshold rejection. */
  nextBelow(bound: number): number {
    if (bound <= 0) throw new RangeError(`bound must be positive, got ${bound}`);
    const threshold = (TWO32 - bound) % bound;
    for (;;) {
      const r = this.nextU32();
      if (r >= threshold) return r % bound;
    }
  }
}

export function episodeRng(baseSeed: bigint | number, episodeIndex: number): Pcg32 {
  if (typeof baseSeed === "number" && Number.isSafeInteger(baseSeed) &&
      baseSeed >= 0 && episodeIndex < TWO32) {
    // xor touches only the low 32 bits when the episode index fits u32
    const hi = Math.floor(baseSeed / TWO32) >>> 0;
    const lo = ((baseSeed >>> 0) ^ episodeIndex) >>> 0;
    return new Pcg32(hi * TWO32 + lo, episodeIndex);
  }
  const seed = (BigInt(baseSeed) ^ BigInt(episodeIndex)) & ((1n << 64n) - 1n);
  return new Pcg32(seed, episodeIndex);
}
