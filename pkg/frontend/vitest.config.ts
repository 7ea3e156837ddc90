import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    environment: "node",
    // the integration suite boots the python gateway and runs real inference
    testTimeout: 120_000,
    hookTimeout: 180_000,
  },
});
