/**
 * Dot-eating game on a 14x14 grid, 64x64 frames.
 *
 * Reset draw order (must match the reference engine exactly):
 *   1. textured background only: bgSeed = rng.nextU32()
 *   2. player cell: nextBelow(196)
 *   3. each dot in order: nextBelow(196), redrawn while occupied.
 * Steps draw nothing.
 */

import { BackgroundMode, Canvas, textureFill } from "./render";
import { Pcg32 } from "./rng";

export const GRID = 14;
export const CELL_PX = 4;
export const MARGIN_PX = 4;
export const FRAME_SIZE = 64;
export const MAX_STEPS = 100;
export const ACTION_COUNT = 4;

const PLAYER_COLOR: [number, number, number] = [255, 220, 40];
const DOT_COLOR: [number, number, number] = [255, 255, 255];

export interface PacmanState {
  playerR: number;
  playerC: number;
  dots: Array<[number, number]>; // cells in creation order
  stepsTaken: number;
  done: boolean;
  bgSeed: number;
}

const DELTAS: Array<[number, number]> = [[-1, 0], [1, 0], [0, -1], [0, 1]];

export function pacmanReset(nDots: number, rng: Pcg32,
                            background: BackgroundMode): PacmanState {
  if (nDots < 1 || nDots + 1 > GRID * GRID) {
    throw new RangeError(`invalid dot count ${nDots}`);
  }
  const bgSeed = background === "textured" ? rng.nextU32() : 0;
  const idx = rng.nextBelow(GRID * GRID);
  const playerR = Math.floor(idx / GRID);
  const playerC = idx % GRID;
  const occupied = new Set<number>([idx]);
  const dots: Array<[number, number]> = [];
  for (let i = 0; i < nDots; i++) {
    let cell: number;
    do {
      cell = rng.nextBelow(GRID * GRID);
    } while (occupied.has(cell));
    occupied.add(cell);
    dots.push([Math.floor(cell / GRID), cell % GRID]);
  }
  return { playerR, playerC, dots, stepsTaken: 0, done: false, bgSeed };
}

export function pacmanStep(state: PacmanState, action: number): number {
  if (state.done) throw new Error("step() called on a finished episode");
  const [dr, dc] = DELTAS[action];
  state.playerR = Math.min(Math.max(state.playerR + dr, 0), GRID - 1);
  state.playerC = Math.min(Math.max(state.playerC + dc, 0), GRID - 1);
  let reward = -0.01;
  for (let i = 0; i < state.dots.length; i++) {
    if (state.dots[i][0] === state.playerR && state.dots[i][1] === state.playerC) {
      state.dots.splice(i, 1);
      reward = 0.99;
      break;
    }
  }
  state.stepsTaken += 1;
  state.done = state.dots.length === 0 || state.stepsTaken >= MAX_STEPS;
  return reward;
}

export function renderPacman(state: PacmanState, background: BackgroundMode,
                             canvas: Canvas): void {
  if (background === "textured") {
    textureFill(canvas, state.bgSeed, 8);
  } else {
    canvas.clear();
  }
  for (const [r, c] of state.dots) {
    canvas.fillRect(MARGIN_PX + r * CELL_PX + 1, MARGIN_PX + c * CELL_PX + 1, 2, 2,
                    ...DOT_COLOR);
  }
  canvas.fillRect(MARGIN_PX + state.playerR * CELL_PX,
                  MARGIN_PX + state.playerC * CELL_PX, CELL_PX, CELL_PX,
                  ...PLAYER_COLOR);
}

/** Greedy teacher: nearest dot by Manhattan distance, distance ties broken
 *  by (row, col), direction ties in the fixed order up < down < left < right. */
export function pacmanGreedy(state: PacmanState): number {
  const n = state.dots.length;
  if (n === 0) throw new Error("no dots left");
  let bestD = 0x7fffffff;
  let bestR = -1;
  let bestC = -1;
  for (let i = 0; i < n; i++) {
    const r = state.dots[i][0];
    const c = state.dots[i][1];
    const d = Math.abs(r - state.playerR) + Math.abs(c - state.playerC);
    if (d < bestD || (d === bestD && (r < bestR || (r === bestR && c < bestC)))) {
      bestD = d;
      bestR = r;
      bestC = c;
    }
  }
  if (bestR < state.playerR) return 0; // up
  if (bestR > state.playerR) return 1; // down
  if (bestC < state.playerC) return 2; // left
  return 3; // right
}
