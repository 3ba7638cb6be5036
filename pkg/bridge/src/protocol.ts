/**
 * Wire protocol for the prompt-selection sidecar.
 *
 * One JSON object per line over standard streams. A session opens with a
 * `hello` handshake that fixes the prompt count, the step count and the
 * option terms; every later line is a score request answered by exactly one
 * response (a choice or an error). Field-level rules live in PROTOCOL.md.
 */

export const PROTOCOL_VERSION = 1;

/** Raw scores live in score units; spots are priced on a 0-100 axis. */
export const SCORE_SCALE = 100;

export const DEFAULT_STRIKE = 25;

export interface HelloMessage {
  type: "hello";
  version: number;
  n: number;
  t: number;
  strike?: number;
  rate?: number;
}

export interface ReadyMessage {
  type: "ready";
  version: number;
  n: number;
  t: number;
  strike: number;
  rate: number;
}

export interface ScoreRequest {
  type?: "request";
  step: number;
  total_steps?: number;
  scores: number[];
  sigma: number;
}

export interface ChoiceResponse {
  type: "response";
  choice: number;
  bs_scores: number[];
}

export type ErrorCode =
  | "BAD_JSON"
  | "BAD_HELLO"
  | "BAD_REQUEST"
  | "BAD_ARITY"
  | "BAD_VALUE"
  | "BAD_STEP"
  | "INTERNAL";

export interface ErrorResponse {
  type: "error";
  code: ErrorCode;
  message: string;
}

export type ServerMessage = ReadyMessage | ChoiceResponse | ErrorResponse;

const ERROR_CODES: ReadonlySet<string> = new Set([
  "BAD_JSON",
  "BAD_HELLO",
  "BAD_REQUEST",
  "BAD_ARITY",
  "BAD_VALUE",
  "BAD_STEP",
  "INTERNAL",
]);

export function isFiniteNumber(value: unknown): value is number {
  return typeof value === "number" && Number.isFinite(value);
}

export function isIndex(value: unknown): value is number {
  return typeof value === "number" && Number.isInteger(value);
}

function isNumberArray(value: unknown): value is number[] {
  return Array.isArray(value) && value.every((v) => typeof v === "number");
}

export function serializeMessage(msg: HelloMessage | ScoreRequest | ServerMessage): string {
  return JSON.stringify(msg) + "\n";
}

/** Parse one server output line; null when it is not a protocol message. */
export function parseServerMessage(line: string): ServerMessage | null {
  let value: unknown;
  try {
    value = JSON.parse(line.trim());
  } catch {
    return null;
  }
  if (typeof value !== "object" || value === null || Array.isArray(value)) {
    return null;
  }
  const msg = value as Record<string, unknown>;
  if (msg.type === "ready") {
    if (
      isIndex(msg.version) &&
      isIndex(msg.n) &&
      isIndex(msg.t) &&
      isFiniteNumber(msg.strike) &&
      isFiniteNumber(msg.rate)
    ) {
      return msg as unknown as ReadyMessage;
    }
    return null;
  }
  if (msg.type === "response") {
    if (isIndex(msg.choice) && isNumberArray(msg.bs_scores)) {
      return msg as unknown as ChoiceResponse;
    }
    return null;
  }
  if (msg.type === "error") {
    if (typeof msg.code === "string" && ERROR_CODES.has(msg.code) && typeof msg.message === "string") {
      return msg as unknown as ErrorResponse;
    }
    return null;
  }
  return null;
}
