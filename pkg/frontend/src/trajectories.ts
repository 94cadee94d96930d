/**
 * Trajectory panel: one black curve per chain CSV, a red horizontal
 * reference line at the truth log posterior, iterations on the x axis.
 */

import { existsSync } from "node:fs";
import { join } from "node:path";

import type { Figure, LineSeries } from "./figure.js";
import { readManifest, readTrajectoryCsv, SchemaError } from "./schema.js";

export function buildTrajectoryFigure(runDir: string): Figure {
  const manifestPath = join(runDir, "manifest.json");
  if (!existsSync(manifestPath)) {
    throw new SchemaError(`${runDir}: missing manifest.json`);
  }
  const manifest = readManifest(manifestPath);
  if (manifest.chains.length === 0) {
    throw new SchemaError(`${manifestPath}: manifest lists no chains`);
  }
  const warnings: string[] = [];
  const series: LineSeries[] = manifest.chains.map((chain) => {
    const rows = readTrajectoryCsv(join(runDir, chain.csv));
    return {
      kind: "line" as const,
      label: chain.csv.replace(/\.csv$/, ""),
      color: "black",
      points: rows.map((row) => ({ x: row.iteration, y: row.logPosterior })),
    };
  });
  const referenceLines = [];
  if (manifest.truthLogPosterior === null) {
    warnings.push(
      "manifest carries no truth log posterior; reference line omitted",
    );
  } else {
    referenceLines.push({
      kind: "ref-line" as const,
      label: "truth log posterior",
      color: "red",
      y: manifest.truthLogPosterior,
    });
  }
  return {
    kind: "trajectory",
    title: `${manifest.experiment}: log posterior vs iterations (${series.length} chains)`,
    xLabel: "iteration",
    yLabel: "log posterior",
    series,
    referenceLines,
    cells: [],
    contours: [],
    warnings,
  };
}
