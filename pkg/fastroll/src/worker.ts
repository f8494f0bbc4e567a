/** Worker-thread entry: runs a slice of episodes and returns the encoded
 * records so the main thread can merge output in episode order. */

import { parentPort, workerData } from "node:worker_threads";

import { readAtlas } from "./glyphs";
import { EngineConfig, runEpisodeSlice } from "./rollout";

interface WorkerInput {
  config: Omit<EngineConfig, "atlas"> & { atlasPath?: string };
  episodes: number[];
}

const input = workerData as WorkerInput;
const config: EngineConfig = {
  ...input.config,
  atlas: input.config.atlasPath ? readAtlas(input.config.atlasPath) : undefined,
};
const results = runEpisodeSlice(config, input.episodes);
parentPort!.postMessage(
  results.map((r) => ({ summary: r.summary, encoded: r.encoded })),
);
