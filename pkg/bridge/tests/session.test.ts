import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import { Session } from "../src/session.js";
import { ServerMessage } from "../src/protocol.js";
import type { Script } from "../src/stub-pipeline.js";

const HELLO = { type: "hello", version: 1, n: 2, t: 100 };

function drive(session: Session, msg: unknown): ServerMessage {
  return session.handleLine(JSON.stringify(msg));
}

function openSession(hello: object = HELLO): Session {
  const session = new Session();
  const ready = drive(session, hello);
  expect(ready.type).toBe("ready");
  return session;
}

describe("handshake", () => {
  it("fills strike and rate defaults into the ready echo", () => {
    const session = new Session();
    expect(drive(session, HELLO)).toEqual({
      type: "ready",
      version: 1,
      n: 2,
      t: 100,
      strike: 25,
      rate: 0.01,
    });
  });

  it("echoes explicit option terms", () => {
    const session = new Session();
    const ready = drive(session, { ...HELLO, t: 50, strike: 30.5, rate: -0.002 });
    expect(ready).toEqual({ type: "ready", version: 1, n: 2, t: 50, strike: 30.5, rate: -0.002 });
  });

  it("requires the version field", () => {
    const session = new Session();
    const err = drive(session, { type: "hello", n: 2, t: 100 });
    expect(err).toMatchObject({ type: "error", code: "BAD_HELLO" });
    expect((err as { message: string }).message).toContain("version");
  });

  it("rejects a version it does not speak", () => {
    expect(drive(new Session(), { ...HELLO, version: 2 })).toMatchObject({ code: "BAD_HELLO" });
  });

  it("validates shape fields", () => {
    expect(drive(new Session(), { ...HELLO, n: 1 })).toMatchObject({ code: "BAD_HELLO" });
    expect(drive(new Session(), { ...HELLO, n: 2.5 })).toMatchObject({ code: "BAD_HELLO" });
    expect(drive(new Session(), { ...HELLO, t: 0 })).toMatchObject({ code: "BAD_HELLO" });
    expect(drive(new Session(), { ...HELLO, strike: -1 })).toMatchObject({ code: "BAD_HELLO" });
    expect(drive(new Session(), { ...HELLO, rate: "high" })).toMatchObject({ code: "BAD_HELLO" });
  });

  it("rejects requests sent before it, then still accepts the handshake", () => {
    const session = new Session();
    const err = drive(session, { step: 0, scores: [0.2, 0.3], sigma: 0.05 });
    expect(err).toMatchObject({ type: "error", code: "BAD_HELLO" });
    expect(drive(session, HELLO).type).toBe("ready");
  });

  it("rejects a second hello on an open session", () => {
    const session = openSession();
    expect(drive(session, HELLO)).toMatchObject({ type: "error", code: "BAD_HELLO" });
  });
});

describe("requests", () => {
  it("answers with the cheapest option's index and all priced scores", () => {
    const session = openSession();
    const reply = drive(session, { step: 1, scores: [0.2, 0.3], sigma: 0.05 });
    expect(reply.type).toBe("response");
    const { choice, bs_scores } = reply as { choice: number; bs_scores: number[] };
    expect(choice).toBe(0);
    // Frozen from `bsmix price` at spot 20/30, K 25, r 0.01, sigma 0.05, tte 99.
    expect(Math.abs(bs_scores[0] - 10.887251259911816)).toBeLessThanOrEqual(1e-9);
    expect(Math.abs(bs_scores[1] - 20.735678538545656)).toBeLessThanOrEqual(1e-9);
  });

  it("accepts an optional matching total_steps and a request type tag", () => {
    const session = openSession();
    const reply = drive(session, {
      type: "request",
      step: 3,
      total_steps: 100,
      scores: [0.9, 0.1],
      sigma: 0.3,
    });
    expect(reply).toMatchObject({ type: "response", choice: 1 });
  });

  it("flags wrong arity, then serves the corrected retry of the same step", () => {
    const session = openSession();
    expect(drive(session, { step: 4, scores: [0.2, 0.3, 0.4], sigma: 0.05 })).toMatchObject({
      type: "error",
      code: "BAD_ARITY",
    });
    expect(drive(session, { step: 4, scores: [0.2, 0.3], sigma: 0.05 }).type).toBe("response");
  });

  it("prefers BAD_ARITY over value checks on the same message", () => {
    const session = openSession();
    expect(drive(session, { step: 0, scores: [-1, 0.3, 0.4], sigma: 0.05 })).toMatchObject({
      code: "BAD_ARITY",
    });
  });

  it("enforces strictly increasing steps inside the schedule", () => {
    const session = openSession();
    expect(drive(session, { step: 10, scores: [0.2, 0.3], sigma: 0.05 }).type).toBe("response");
    expect(drive(session, { step: 10, scores: [0.2, 0.3], sigma: 0.05 })).toMatchObject({ code: "BAD_STEP" });
    expect(drive(session, { step: 9, scores: [0.2, 0.3], sigma: 0.05 })).toMatchObject({ code: "BAD_STEP" });
    expect(drive(session, { step: -1, scores: [0.2, 0.3], sigma: 0.05 })).toMatchObject({ code: "BAD_STEP" });
    expect(drive(session, { step: 100, scores: [0.2, 0.3], sigma: 0.05 })).toMatchObject({ code: "BAD_STEP" });
    expect(drive(session, { step: 11, scores: [0.2, 0.3], sigma: 0.05 }).type).toBe("response");
  });

  it("flags domain violations as BAD_VALUE", () => {
    const session = openSession();
    expect(drive(session, { step: 0, scores: [-0.1, 0.3], sigma: 0.05 })).toMatchObject({ code: "BAD_VALUE" });
    expect(drive(session, { step: 0, scores: [0.1, 0.3], sigma: -0.05 })).toMatchObject({ code: "BAD_VALUE" });
    expect(drive(session, { step: 0, total_steps: 99, scores: [0.1, 0.3], sigma: 0.05 })).toMatchObject({
      code: "BAD_VALUE",
    });
  });

  it("flags mistyped fields as BAD_REQUEST", () => {
    const session = openSession();
    expect(drive(session, { step: 0.5, scores: [0.1, 0.3], sigma: 0.05 })).toMatchObject({ code: "BAD_REQUEST" });
    expect(drive(session, { step: 0, scores: "0.1,0.3", sigma: 0.05 })).toMatchObject({ code: "BAD_REQUEST" });
    expect(drive(session, { step: 0, scores: [0.1, "x"], sigma: 0.05 })).toMatchObject({ code: "BAD_REQUEST" });
    expect(drive(session, { step: 0, scores: [0.1, 0.3], sigma: "low" })).toMatchObject({ code: "BAD_REQUEST" });
    expect(drive(session, { type: "query", step: 0, scores: [0.1, 0.3], sigma: 0.05 })).toMatchObject({
      code: "BAD_REQUEST",
    });
  });

  it("answers unparseable lines with BAD_JSON and keeps serving", () => {
    const session = openSession();
    expect(session.handleLine("{oops")).toMatchObject({ type: "error", code: "BAD_JSON" });
    expect(session.handleLine("[1,2]")).toMatchObject({ type: "error", code: "BAD_JSON" });
    expect(drive(session, { step: 0, scores: [0.2, 0.3], sigma: 0.05 }).type).toBe("response");
  });
});

describe("determinism", () => {
  it("replays the 100-step script to an identical response stream", () => {
    const script = JSON.parse(
      readFileSync(new URL("./fixtures/script_100step.json", import.meta.url), "utf8"),
    ) as Script;
    const streams = [0, 1].map(() => {
      const session = new Session();
      const out: string[] = [JSON.stringify(drive(session, { type: "hello", version: 1, ...script.hello }))];
      for (const step of script.steps) {
        out.push(JSON.stringify(drive(session, { step: step.step, scores: step.scores, sigma: step.sigma })));
      }
      return out.join("\n");
    });
    expect(streams[0]).toBe(streams[1]);
    expect(streams[0]).not.toContain('"error"');
  });
});
