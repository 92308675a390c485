import { defineConfig } from "vitest/config";

export default defineConfig({
  build: {
    outDir: "dist",
    target: "es2021",
  },
  test: {
    environment: "node",
    include: ["tests/**/*.test.ts"],
    testTimeout: 30000,
    hookTimeout: 30000,
    // The integration suite shares the host with the service process; keep
    // test files sequential so timing assertions see an unloaded machine.
    fileParallelism: false,
  },
});
