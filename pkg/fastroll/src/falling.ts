/**
 * Falling-digit game on a 16x16 cell grid, 128x128 frames.
 *
 * Reset draw order: [textured: bgSeed u32], then per target a column via
 * nextBelow(16) redrawn while taken followed by a value nextBelow(10),
 * then the falling digit (column, value). A respawn during a step draws
 * column then value. On a non-terminal landing the next digit spawns in
 * the same step, so every returned observation shows an active digit.
 *
 * Closest-target rule: min |target - falling| value difference, ties by
 * smaller value, then smaller column; a correct hit lands exactly there.
 */

import { Glyph, tightBounds } from "./glyphs";
import { BackgroundMode, Canvas, textureFill } from "./render";
import { Pcg32 } from "./rng";

export const COLS = 16;
export const ROWS = 16;
export const CELL_PX = 8;
export const FRAME_SIZE = 128;
export const MAX_STEPS = 100;
export const ACTION_COUNT = 3;

const DIGIT_COLOR: [number, number, number] = [255, 255, 255];
const DCOL = [-1, 0, 1];

export interface Target {
  id: number;
  value: number;
  col: number;
}

export interface FallingState {
  falling: { value: number; row: number; col: number } | null;
  targets: Target[];
  stepsTaken: number;
  done: boolean;
  bgSeed: number;
}

export function fallingReset(nTargets: number, rng: Pcg32,
                             background: BackgroundMode): FallingState {
  if (nTargets < 1 || nTargets > COLS) {
    throw new RangeError(`invalid target count ${nTargets}`);
  }
  const bgSeed = background === "textured" ? rng.nextU32() : 0;
  const used = new Set<number>();
  const targets: Target[] = [];
  for (let i = 0; i < nTargets; i++) {
    let col: number;
    do {
      col = rng.nextBelow(COLS);
    } while (used.has(col));
    used.add(col);
    targets.push({ id: i + 1, value: rng.nextBelow(10), col });
  }
  const falling = spawn(rng);
  return { falling, targets, stepsTaken: 0, done: false, bgSeed };
}

function spawn(rng: Pcg32): { value: number; row: number; col: number } {
  const col = rng.nextBelow(COLS);
  const value = rng.nextBelow(10);
  return { value, row: 0, col };
}

export function closestTarget(state: FallingState): Target {
  if (!state.falling) throw new Error("no falling digit");
  const fv = state.falling.value;
  let best = state.targets[0];
  for (const t of state.targets.slice(1)) {
    const a: [number, number, number] = [Math.abs(t.value - fv), t.value, t.col];
    const b: [number, number, number] = [Math.abs(best.value - fv), best.value, best.col];
    if (a[0] < b[0] || (a[0] === b[0] && (a[1] < b[1] ||
        (a[1] === b[1] && a[2] < b[2])))) {
      best = t;
    }
  }
  return best;
}

export function fallingStep(state: FallingState, action: number, rng: Pcg32): number {
  if (state.done) throw new Error("step() called on a finished episode");
  const f = state.falling!;
  const col = Math.min(Math.max(f.col + DCOL[action], 0), COLS - 1);
  const row = f.row + 1;

  let reward = 0;
  if (row === ROWS - 1) {
    const canonical = closestTarget(state);
    const landedIdx = state.targets.findIndex((t) => t.col === col);
    if (landedIdx >= 0 && state.targets[landedIdx].id === canonical.id) {
      reward = 1;
      state.targets.splice(landedIdx, 1);
    } else {
      reward = -1;
    }
    state.falling = null;
  } else {
    state.falling = { value: f.value, row, col };
  }

  state.stepsTaken += 1;
  state.done = state.targets.length === 0 || state.stepsTaken >= MAX_STEPS;
  if (!state.done && state.falling === null) {
    state.falling = spawn(rng);
  }
  return reward;
}

export function fallingHeuristic(state: FallingState): number {
  if (!state.falling) throw new Error("no falling digit");
  const targetCol = closestTarget(state).col;
  if (targetCol < state.falling.col) return 0; // down-left
  if (targetCol > state.falling.col) return 2; // down-right
  return 1; // down
}

export class FallingRenderer {
  private readonly offY: number;
  private readonly offX: number;

  constructor(private readonly atlas: Glyph[]) {
    if (atlas.length !== 10) throw new Error("atlas must hold 10 digit glyphs");
    this.offY = Math.floor((CELL_PX - atlas[0].h) / 2);
    this.offX = Math.floor((CELL_PX - atlas[0].w) / 2);
  }

  private blitDigit(canvas: Canvas, value: number, row: number, col: number): void {
    const g = this.atlas[value];
    canvas.blitMask(g.mask, g.h, g.w, row * CELL_PX + this.offY,
                    col * CELL_PX + this.offX, 1, ...DIGIT_COLOR);
  }

  render(state: FallingState, background: BackgroundMode, canvas: Canvas): void {
    if (background === "textured") {
      textureFill(canvas, state.bgSeed, 16);
    } else {
      canvas.clear();
    }
    for (const t of state.targets) {
      this.blitDigit(canvas, t.value, ROWS - 1, t.col);
    }
    if (state.falling) {
      this.blitDigit(canvas, state.falling.value, state.falling.row, state.falling.col);
    }
  }
}

export { tightBounds };
