import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    // Integration tests spawn the built server and, in the differential
    // suite, a few hundred pricing CLI processes; give them room.
    testTimeout: 60_000,
    hookTimeout: 60_000,
  },
});
