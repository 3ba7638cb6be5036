/**
 * Serve one selection session over stdin/stdout.
 *
 * Strictly serial: requests are answered in arrival order, one line out per
 * line in. One session per process; end-of-input is the shutdown signal and
 * the process exits cleanly with it.
 */

import readline from "node:readline";
import { pathToFileURL } from "node:url";

import { Session } from "./session.js";
import { serializeMessage } from "./protocol.js";

export function serve(input: NodeJS.ReadableStream, output: NodeJS.WritableStream): Promise<void> {
  const session = new Session();
  const rl = readline.createInterface({ input, crlfDelay: Number.POSITIVE_INFINITY });
  return new Promise((resolve) => {
    rl.on("line", (line) => {
      if (!line.trim()) {
        return;
      }
      output.write(serializeMessage(session.handleLine(line)));
    });
    rl.on("close", resolve);
  });
}

const isMain =
  process.argv[1] !== undefined && import.meta.url === pathToFileURL(process.argv[1]).href;

if (isMain) {
  void serve(process.stdin, process.stdout);
}
