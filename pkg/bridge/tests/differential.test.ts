import { execFile } from "node:child_process";
import { fileURLToPath } from "node:url";
import { promisify } from "node:util";
import { describe, expect, it } from "vitest";

import { ChoiceResponse, ReadyMessage } from "../src/protocol.js";
import { loadScript, runStub } from "../src/stub-pipeline.js";

const SERVER = fileURLToPath(new URL("../dist/server.js", import.meta.url));
const SCRIPT = fileURLToPath(new URL("./fixtures/script_100step.json", import.meta.url));

const run = promisify(execFile);

// Direct host-controller call on the same numeric inputs, through its public
// CLI; this is the reference the wire responses must reproduce.
async function hostPrice(spot: number, strike: number, rate: number, sigma: number, tte: number): Promise<number> {
  const args = [
    "price",
    "--S",
    String(spot),
    "--K",
    String(strike),
    "--r",
    String(rate),
    "--sigma",
    String(sigma),
    "--t",
    String(tte),
    "--json",
  ];
  const { stdout } = await run("bsmix", args);
  return (JSON.parse(stdout) as { price: number }).price;
}

async function mapPool<T, R>(items: readonly T[], limit: number, fn: (item: T) => Promise<R>): Promise<R[]> {
  const results = new Array<R>(items.length);
  let next = 0;
  const workers = Array.from({ length: Math.min(limit, items.length) }, async () => {
    for (let i = next++; i < items.length; i = next++) {
      results[i] = await fn(items[i]);
    }
  });
  await Promise.all(workers);
  return results;
}

describe("bridge vs direct controller calls", () => {
  it(
    "reproduces choices exactly and prices within 1e-9 over a 100-step session",
    async () => {
      const script = await loadScript(SCRIPT);
      const transcript = await runStub(script, SERVER);
      const ready = transcript.ready as ReadyMessage;
      expect(ready).toEqual({ type: "ready", version: 1, n: 2, t: 100, strike: 25, rate: 0.01 });

      const jobs = script.steps.flatMap((step, i) =>
        step.scores.map((score) => ({
          spot: score * 100,
          sigma: step.sigma,
          tte: ready.t - (step.step ?? i),
        })),
      );
      const prices = await mapPool(jobs, 8, (job) =>
        hostPrice(job.spot, ready.strike, ready.rate, job.sigma, job.tte),
      );

      let maxDiff = 0;
      for (const [i, step] of script.steps.entries()) {
        const reference = step.scores.map((_, k) => prices[i * step.scores.length + k]);
        let expectedChoice = 0;
        for (let k = 1; k < reference.length; k++) {
          if (reference[k] < reference[expectedChoice]) {
            expectedChoice = k;
          }
        }
        const response = transcript.exchanges[i].response as ChoiceResponse;
        expect(response.type).toBe("response");
        expect(response.choice).toBe(expectedChoice);
        for (let k = 0; k < reference.length; k++) {
          maxDiff = Math.max(maxDiff, Math.abs(response.bs_scores[k] - reference[k]));
        }
      }
      expect(transcript.exchanges).toHaveLength(100);
      expect(maxDiff).toBeLessThanOrEqual(1e-9);
    },
    300_000,
  );
});
