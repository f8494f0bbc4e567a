export { Pcg32, episodeRng } from "./rng";
export { Canvas, textureFill } from "./render";
export { crc32, readAtlas, tightBounds } from "./glyphs";
export type { Glyph } from "./glyphs";
export {
  ENV_FALLING,
  ENV_PACMAN,
  FRAME_SIZES,
  decodeRecord,
  encodeRecord,
} from "./record";
export type { EpisodeRecord, StepData } from "./record";
export {
  ACTION_COUNT as PACMAN_ACTIONS,
  FRAME_SIZE as PACMAN_FRAME,
  pacmanGreedy,
  pacmanReset,
  pacmanStep,
  renderPacman,
} from "./pacman";
export {
  ACTION_COUNT as FALLING_ACTIONS,
  FRAME_SIZE as FALLING_FRAME,
  FallingRenderer,
  closestTarget,
  fallingHeuristic,
  fallingReset,
  fallingStep,
} from "./falling";
export { runEpisode, runEpisodeRange } from "./rollout";
export type { EngineConfig, EpisodeSummary } from "./rollout";
export { verifyPaths, verifyRecords } from "./verify";
export type { Divergence, VerifyReport } from "./verify";
