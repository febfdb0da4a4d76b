import { defineConfig } from "vitest/config";

// must match tests/service.setup.ts; the document origin equals the service
// origin so happy-dom's same-origin policy allows the round-trip requests
const SERVICE_PORT = Number(process.env.TVCP_UI_TEST_PORT ?? 8473);

export default defineConfig({
  test: {
    environment: "happy-dom",
    environmentOptions: {
      happyDOM: {
        url: `http://127.0.0.1:${SERVICE_PORT}/`,
        settings: {
          navigation: {
            disableMainFrameNavigation: true,
          },
        },
      },
    },
    globalSetup: ["tests/service.setup.ts"],
    testTimeout: 60_000,
    hookTimeout: 60_000,
    fileParallelism: false,
  },
});
