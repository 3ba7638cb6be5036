import { execFile } from "node:child_process";
import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { promisify } from "node:util";
import { describe, expect, it } from "vitest";

import { Script, Transcript, loadScript, runStub } from "../src/stub-pipeline.js";

const SERVER = fileURLToPath(new URL("../dist/server.js", import.meta.url));
const STUB = fileURLToPath(new URL("../dist/stub-pipeline.js", import.meta.url));
const SCRIPT_3STEP = fileURLToPath(new URL("./fixtures/script_3step.json", import.meta.url));
const GOLDEN_3STEP = new URL("./golden/transcript_3step.json", import.meta.url);

const run = promisify(execFile);

describe("runStub", () => {
  it("replays a 3-step script as 3 request/response exchanges", async () => {
    const transcript = await runStub(await loadScript(SCRIPT_3STEP), SERVER);
    expect(transcript.ready.type).toBe("ready");
    expect(transcript.exchanges).toHaveLength(3);
    for (const exchange of transcript.exchanges) {
      expect(exchange.response.type).toBe("response");
    }
    expect(transcript.exit_code).toBe(0);
  });

  it("matches the golden transcript", async () => {
    const golden = JSON.parse(readFileSync(GOLDEN_3STEP, "utf8")) as Transcript;
    const transcript = await runStub(await loadScript(SCRIPT_3STEP), SERVER);
    expect(transcript).toEqual(golden);
  });

  it("shuts down cleanly after the handshake on an empty script", async () => {
    const script: Script = { hello: { n: 2, t: 10 }, steps: [] };
    const transcript = await runStub(script, SERVER);
    expect(transcript.ready).toEqual({ type: "ready", version: 1, n: 2, t: 10, strike: 25, rate: 0.1 });
    expect(transcript.exchanges).toEqual([]);
    expect(transcript.exit_code).toBe(0);
  });

  it("records protocol errors without tearing the replay down", async () => {
    const script: Script = {
      hello: { n: 2, t: 10 },
      steps: [
        { step: 0, scores: [0.2, 0.3], sigma: 0.05 },
        { step: 1, scores: [0.2, 0.3, 0.9], sigma: 0.05 },
        { step: 2, scores: [0.4, 0.1], sigma: 0.05 },
      ],
    };
    const transcript = await runStub(script, SERVER);
    expect(transcript.exchanges.map((e) => e.response.type)).toEqual(["response", "error", "response"]);
    expect(transcript.exchanges[1].response).toMatchObject({ code: "BAD_ARITY" });
    expect(transcript.exit_code).toBe(0);
  });

  it("replays the 100-step script twice to identical response streams", async () => {
    const script = await loadScript(fileURLToPath(new URL("./fixtures/script_100step.json", import.meta.url)));
    const first = await runStub(script, SERVER);
    const second = await runStub(script, SERVER);
    expect(first.exchanges).toHaveLength(100);
    expect(JSON.stringify(second)).toBe(JSON.stringify(first));
  });
});

describe("stub CLI", () => {
  it("prints the transcript for a script file", async () => {
    const { stdout } = await run(process.execPath, [STUB, SCRIPT_3STEP]);
    const golden = JSON.parse(readFileSync(GOLDEN_3STEP, "utf8")) as Transcript;
    expect(JSON.parse(stdout)).toEqual(golden);
  });

  it("exits with usage on a missing argument", async () => {
    await expect(run(process.execPath, [STUB])).rejects.toMatchObject({ code: 2 });
  });
});
