/** Shared argv handling for the two plot commands. */

import { writeFileSync } from "node:fs";

import type { Figure } from "./figure.js";
import { renderSvg } from "./figure.js";

export interface CliArgs {
  input: string;
  output: string;
  manifest?: string;
}

export function parseArgs(argv: string[], usage: string): CliArgs {
  const positional: string[] = [];
  let output: string | undefined;
  let manifest: string | undefined;
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (arg === "-o" || arg === "--out") {
      output = argv[++i];
    } else if (arg === "--manifest") {
      manifest = argv[++i];
    } else if (arg === "-h" || arg === "--help") {
      console.log(usage);
      process.exit(0);
    } else {
      positional.push(arg);
    }
  }
  if (positional.length !== 1 || !output) {
    console.error(usage);
    process.exit(2);
  }
  return { input: positional[0], output, manifest };
}

export function emit(figure: Figure, outputPath: string): void {
  if (!outputPath.endsWith(".svg")) {
    console.error(
      `unsupported output format for ${outputPath}: only .svg is produced`,
    );
    process.exit(2);
  }
  for (const warning of figure.warnings) {
    console.warn(`warning: ${warning}`);
  }
  writeFileSync(outputPath, renderSvg(figure));
  console.log(`wrote ${outputPath}`);
}
