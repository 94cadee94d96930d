#!/usr/bin/env node
/** plot-heatmap <grid.csv> -o fig.svg [--manifest <manifest.json>] */

import { emit, parseArgs } from "./cli-common.js";
import { buildHeatmapFigure } from "./heatmap.js";

const usage =
  "usage: plot-heatmap <grid.csv> -o <figure.svg> [--manifest <manifest.json>]";
const args = parseArgs(process.argv.slice(2), usage);
try {
  emit(buildHeatmapFigure(args.input, args.manifest), args.output);
} catch (err) {
  console.error(String(err));
  process.exit(1);
}
