import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    include: ["tests/**/*.test.ts"],
    // the integration suite boots real backend servers
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
