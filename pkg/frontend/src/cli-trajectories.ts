#!/usr/bin/env node
/** plot-trajectories <run-dir> -o fig.svg */

import { emit, parseArgs } from "./cli-common.js";
import { buildTrajectoryFigure } from "./trajectories.js";

const usage = "usage: plot-trajectories <run-dir> -o <figure.svg>";
const args = parseArgs(process.argv.slice(2), usage);
try {
  emit(buildTrajectoryFigure(args.input), args.output);
} catch (err) {
  console.error(String(err));
  process.exit(1);
}
