import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["test/**/*.test.ts"],
    testTimeout: 300_000,
    hookTimeout: 900_000,
    // tfjs keeps kernels in module state; one worker avoids duplicated
    // backend warmup across forks
    pool: "forks",
    maxWorkers: 1,
    minWorkers: 1,
  },
});
