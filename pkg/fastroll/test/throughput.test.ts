/**
 * Throughput acceptance: >= 10x the reference engine on dot-game rollouts
 * with frames disabled (identical workload, both writing record files).
 */

import { describe, expect, it } from "vitest";

import { runBench } from "../bench/throughput";

describe("throughput", () => {
  it("is at least 10x the reference engine with frames disabled", () => {
    const result = runBench(400, 3);
    // eslint-disable-next-line no-console
    console.log(
      `fast ${Math.round(result.fastStepsPerSecond)} steps/s vs reference ` +
      `${Math.round(result.referenceStepsPerSecond)} steps/s ` +
      `(${result.speedup.toFixed(1)}x)`,
    );
    expect(result.speedup).toBeGreaterThanOrEqual(10);
  }, 180_000);
});
