import { defineConfig } from 'vitest/config'

export default defineConfig({
    test: {
        environment: 'node', // DOM suites opt in per file with @vitest-environment jsdom
        testTimeout: 120_000,
        hookTimeout: 120_000,
    },
})
