#!/usr/bin/env node
/**
 * Command-line entry point.
 *
 *   capture-orchestrator --config capture.config.json [--out DIR] [--accessible-only]
 *
 * Runs the configured capture batch sequentially, printing one line per
 * capture, and writes `capture_manifest.json` next to the HAR files.
 *
 * Exit codes: 0 batch completed with at least one successful capture (or
 * every site was skipped), 1 batch completed but nothing succeeded,
 * 2 usage or configuration error.
 */

import { parseArgs } from "node:util";
import { loadConfig, ConfigError } from "./config";
import { runBatch } from "./orchestrator";

const USAGE = `Usage: capture-orchestrator --config FILE [--out DIR] [--accessible-only]

Options:
  --config FILE        JSON capture configuration (required)
  --out DIR            Override the configured output directory
  --accessible-only    Skip sites the previous manifest in the output
                       directory marked blocked or timed out
  --help               Show this help
`;

export async function main(argv: string[]): Promise<number> {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      options: {
        config: { type: "string" },
        out: { type: "string" },
        "accessible-only": { type: "boolean", default: false },
        help: { type: "boolean", default: false },
      },
      allowPositionals: false,
    });
  } catch (err) {
    process.stderr.write(`${(err as Error).message}\n${USAGE}`);
    return 2;
  }

  if (parsed.values.help) {
    process.stdout.write(USAGE);
    return 0;
  }
  if (!parsed.values.config) {
    process.stderr.write(`--config is required\n${USAGE}`);
    return 2;
  }

  let config;
  try {
    config = loadConfig(parsed.values.config);
    if (parsed.values.out) {
      config = { ...config, outputDir: parsed.values.out };
    }
  } catch (err) {
    if (err instanceof ConfigError) {
      process.stderr.write(`config error: ${err.message}\n`);
      return 2;
    }
    throw err;
  }

  const batch = await runBatch(config, {
    accessibleOnly: parsed.values["accessible-only"],
    log: (line) => process.stdout.write(line + "\n"),
  });

  const attempted = batch.sites.reduce((total, site) => total + site.captures.length, 0);
  process.stdout.write(
    `${attempted} captures attempted, ${batch.filesWritten.length} HAR files written\n` +
      `manifest: ${batch.manifestPath}\n`,
  );
  if (attempted > 0 && batch.filesWritten.length === 0) {
    process.stderr.write("no capture succeeded\n");
    return 1;
  }
  return 0;
}

if (require.main === module) {
  main(process.argv.slice(2)).then(
    (code) => {
      process.exitCode = code;
    },
    (err) => {
      process.stderr.write(`${err instanceof Error ? err.stack ?? err.message : err}\n`);
      process.exitCode = 1;
    },
  );
}
