/**
 * Per-session protocol state machine.
 *
 * Kept free of any I/O so the serve loop stays a two-line adapter and tests
 * can drive sessions line by line in process. Every input line maps to
 * exactly one output message; errors never tear the session down, they just
 * answer the offending line. Failed requests do not advance the step
 * watermark, so a client may retry the same step after fixing its message.
 */

import {
  ChoiceResponse,
  DEFAULT_STRIKE,
  ErrorCode,
  ErrorResponse,
  PROTOCOL_VERSION,
  ReadyMessage,
  SCORE_SCALE,
  ServerMessage,
  isFiniteNumber,
  isIndex,
} from "./protocol.js";
import { argminLowestIndex, bsScores } from "./pricing.js";

interface SessionConfig {
  n: number;
  t: number;
  strike: number;
  rate: number;
}

function errorResponse(code: ErrorCode, message: string): ErrorResponse {
  return { type: "error", code, message };
}

export class Session {
  private config: SessionConfig | null = null;
  private lastStep = -1;

  get configured(): boolean {
    return this.config !== null;
  }

  handleLine(line: string): ServerMessage {
    let value: unknown;
    try {
      value = JSON.parse(line);
    } catch {
      return errorResponse("BAD_JSON", "line is not valid JSON");
    }
    if (typeof value !== "object" || value === null || Array.isArray(value)) {
      return errorResponse("BAD_JSON", "line must be a JSON object");
    }
    const msg = value as Record<string, unknown>;
    try {
      if (this.config === null) {
        return this.handleHello(msg);
      }
      return this.handleRequest(msg, this.config);
    } catch (err) {
      return errorResponse("INTERNAL", err instanceof Error ? err.message : String(err));
    }
  }

  private handleHello(msg: Record<string, unknown>): ServerMessage {
    if (msg.type !== "hello") {
      return errorResponse("BAD_HELLO", "expected a hello handshake before any request");
    }
    if (!("version" in msg)) {
      return errorResponse("BAD_HELLO", 'hello is missing the mandatory "version" field');
    }
    if (msg.version !== PROTOCOL_VERSION) {
      return errorResponse(
        "BAD_HELLO",
        `unsupported protocol version ${JSON.stringify(msg.version)}; this server speaks ${PROTOCOL_VERSION}`,
      );
    }
    if (!isIndex(msg.n) || msg.n < 2) {
      return errorResponse("BAD_HELLO", '"n" must be an integer >= 2');
    }
    if (!isIndex(msg.t) || msg.t < 1) {
      return errorResponse("BAD_HELLO", '"t" must be an integer >= 1');
    }
    const strike = msg.strike === undefined ? DEFAULT_STRIKE : msg.strike;
    if (!isFiniteNumber(strike) || strike < 0) {
      return errorResponse("BAD_HELLO", '"strike" must be a finite number >= 0');
    }
    const rate = msg.rate === undefined ? 1 / msg.t : msg.rate;
    if (!isFiniteNumber(rate)) {
      return errorResponse("BAD_HELLO", '"rate" must be a finite number');
    }
    this.config = { n: msg.n, t: msg.t, strike, rate };
    const ready: ReadyMessage = {
      type: "ready",
      version: PROTOCOL_VERSION,
      n: this.config.n,
      t: this.config.t,
      strike: this.config.strike,
      rate: this.config.rate,
    };
    return ready;
  }

  private handleRequest(msg: Record<string, unknown>, config: SessionConfig): ServerMessage {
    if (msg.type === "hello") {
      return errorResponse("BAD_HELLO", "handshake already completed for this session");
    }
    if (msg.type !== undefined && msg.type !== "request") {
      return errorResponse("BAD_REQUEST", `unknown message type ${JSON.stringify(msg.type)}`);
    }
    if (!isIndex(msg.step)) {
      return errorResponse("BAD_REQUEST", '"step" must be an integer');
    }
    if (!Array.isArray(msg.scores) || msg.scores.some((s) => typeof s !== "number")) {
      return errorResponse("BAD_REQUEST", '"scores" must be an array of numbers');
    }
    if (typeof msg.sigma !== "number") {
      return errorResponse("BAD_REQUEST", '"sigma" must be a number');
    }
    if (msg.total_steps !== undefined && !isIndex(msg.total_steps)) {
      return errorResponse("BAD_REQUEST", '"total_steps" must be an integer when present');
    }
    const scores = msg.scores as number[];
    if (scores.length !== config.n) {
      return errorResponse("BAD_ARITY", `expected ${config.n} scores, got ${scores.length}`);
    }
    if (scores.some((s) => s < 0)) {
      return errorResponse("BAD_VALUE", "scores must be >= 0");
    }
    if (msg.sigma < 0) {
      return errorResponse("BAD_VALUE", '"sigma" must be >= 0');
    }
    if (msg.total_steps !== undefined && msg.total_steps !== config.t) {
      return errorResponse(
        "BAD_VALUE",
        `"total_steps" ${msg.total_steps} does not match the session's t=${config.t}`,
      );
    }
    if (msg.step < 0 || msg.step > config.t - 1) {
      return errorResponse("BAD_STEP", `"step" must lie in [0, ${config.t - 1}]`);
    }
    if (msg.step <= this.lastStep) {
      return errorResponse(
        "BAD_STEP",
        `"step" must increase strictly (last served ${this.lastStep}, got ${msg.step})`,
      );
    }
    const tte = config.t - msg.step;
    const prices = bsScores(scores, msg.sigma, tte, config.strike, config.rate, SCORE_SCALE);
    this.lastStep = msg.step;
    const response: ChoiceResponse = {
      type: "response",
      choice: argminLowestIndex(prices),
      bs_scores: prices,
    };
    return response;
  }
}
