/**
 * Scripted stand-in for a real diffusion pipeline host.
 *
 * Replays recorded per-step score trajectories against a spawned server and
 * records the full exchange. Integration tests drive the real process
 * boundary with it, with no model weights anywhere: the script file IS the
 * "pipeline".
 */

import { spawn } from "node:child_process";
import { readFile } from "node:fs/promises";
import readline from "node:readline";
import { fileURLToPath, pathToFileURL } from "node:url";

import {
  HelloMessage,
  PROTOCOL_VERSION,
  ScoreRequest,
  ServerMessage,
  parseServerMessage,
  serializeMessage,
} from "./protocol.js";

export interface ScriptStep {
  /** Defaults to the array index; scripts may skip steps, never revisit. */
  step?: number;
  scores: number[];
  sigma: number;
}

export interface Script {
  hello: {
    version?: number;
    n: number;
    t: number;
    strike?: number;
    rate?: number;
  };
  steps: ScriptStep[];
}

export interface Exchange {
  request: ScoreRequest;
  response: ServerMessage;
}

export interface Transcript {
  hello: HelloMessage;
  ready: ServerMessage;
  exchanges: Exchange[];
  exit_code: number | null;
}

export async function loadScript(path: string): Promise<Script> {
  const raw = JSON.parse(await readFile(path, "utf8")) as Script;
  if (typeof raw !== "object" || raw === null || typeof raw.hello !== "object" || !Array.isArray(raw.steps)) {
    throw new Error(`${path}: script must be an object with "hello" and "steps"`);
  }
  return raw;
}

const DEFAULT_SERVER = fileURLToPath(new URL("./server.js", import.meta.url));

export async function runStub(script: Script, serverPath: string = DEFAULT_SERVER): Promise<Transcript> {
  const child = spawn(process.execPath, [serverPath], {
    stdio: ["pipe", "pipe", "inherit"],
  });
  const rl = readline.createInterface({ input: child.stdout, crlfDelay: Number.POSITIVE_INFINITY });
  const lines = rl[Symbol.asyncIterator]();

  async function nextMessage(): Promise<ServerMessage> {
    const { value, done } = await lines.next();
    if (done) {
      throw new Error("server closed its stream mid-session");
    }
    const msg = parseServerMessage(String(value));
    if (msg === null) {
      throw new Error(`unparseable server line: ${String(value)}`);
    }
    return msg;
  }

  const hello: HelloMessage = {
    type: "hello",
    version: script.hello.version ?? PROTOCOL_VERSION,
    n: script.hello.n,
    t: script.hello.t,
    ...(script.hello.strike !== undefined ? { strike: script.hello.strike } : {}),
    ...(script.hello.rate !== undefined ? { rate: script.hello.rate } : {}),
  };
  child.stdin.write(serializeMessage(hello));
  const ready = await nextMessage();

  const exchanges: Exchange[] = [];
  for (const [index, step] of script.steps.entries()) {
    const request: ScoreRequest = {
      type: "request",
      step: step.step ?? index,
      total_steps: script.hello.t,
      scores: step.scores,
      sigma: step.sigma,
    };
    child.stdin.write(serializeMessage(request));
    exchanges.push({ request, response: await nextMessage() });
  }

  child.stdin.end();
  const exit_code = await new Promise<number | null>((resolve) => {
    child.on("close", (code) => resolve(code));
  });
  return { hello, ready, exchanges, exit_code };
}

const isMain =
  process.argv[1] !== undefined && import.meta.url === pathToFileURL(process.argv[1]).href;

if (isMain) {
  const path = process.argv[2];
  if (!path) {
    console.error("usage: node stub-pipeline.js SCRIPT.json");
    process.exit(2);
  }
  const transcript = await runStub(await loadScript(path));
  console.log(JSON.stringify(transcript, null, 2));
}
