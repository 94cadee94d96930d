/**
 * Misclassification heatmap over the (q, p) grid with the exact-recovery
 * boundary n * I(p, q) = 2 log n overlaid. Skipped cells (p <= q) render
 * masked.
 */

import { existsSync } from "node:fs";
import { dirname, join } from "node:path";

import type { Figure, HeatCell } from "./figure.js";
import { recoveryBoundary } from "./divergence.js";
import { readGridCsv, readManifest, SchemaError } from "./schema.js";

function cellEdges(values: number[]): Map<number, [number, number]> {
  const sorted = [...new Set(values)].sort((a, b) => a - b);
  const edges = new Map<number, [number, number]>();
  for (let i = 0; i < sorted.length; i++) {
    const lo =
      i === 0
        ? sorted[0] - (sorted.length > 1 ? (sorted[1] - sorted[0]) / 2 : 0.5)
        : (sorted[i - 1] + sorted[i]) / 2;
    const hi =
      i === sorted.length - 1
        ? sorted[i] + (sorted.length > 1 ? (sorted[i] - sorted[i - 1]) / 2 : 0.5)
        : (sorted[i] + sorted[i + 1]) / 2;
    edges.set(sorted[i], [lo, hi]);
  }
  return edges;
}

export function buildHeatmapFigure(
  gridCsvPath: string,
  manifestPath?: string,
): Figure {
  const manifest = manifestPath ?? join(dirname(gridCsvPath), "manifest.json");
  if (!existsSync(manifest)) {
    throw new SchemaError(
      `${manifest}: missing manifest (needed for the schema version check)`,
    );
  }
  readManifest(manifest); // schema version gate; contents unused
  const cells = readGridCsv(gridCsvPath);
  if (cells.length === 0) {
    throw new SchemaError(`${gridCsvPath}: empty grid`);
  }
  const n = cells[0].n;
  const qEdges = cellEdges(cells.map((c) => c.q));
  const pEdges = cellEdges(cells.map((c) => c.p));
  const heatCells: HeatCell[] = cells.map((cell) => {
    const [x0, x1] = qEdges.get(cell.q) as [number, number];
    const [y0, y1] = pEdges.get(cell.p) as [number, number];
    return { x0, x1, y0, y1, value: cell.skipped ? null : cell.meanMisclassified };
  });
  const pValues = cells.map((c) => c.p);
  const qValues = cells.map((c) => c.q);
  const boundary = recoveryBoundary(
    n,
    Math.min(...pValues),
    Math.max(...pValues),
    Math.min(...qValues),
  );
  const contours =
    boundary.length > 0
      ? [
          {
            kind: "contour" as const,
            label: `n*I(p,q) = 2 log n (n=${n})`,
            color: "red",
            points: boundary.map((pt) => ({ x: pt.q, y: pt.p })),
          },
        ]
      : [];
  const warnings =
    boundary.length === 0
      ? ["recovery boundary lies outside the plotted grid"]
      : [];
  return {
    kind: "heatmap",
    title: `mean misclassified nodes over (q, p), n=${n}`,
    xLabel: "between-community rate q",
    yLabel: "within-community rate p",
    series: [],
    referenceLines: [],
    cells: heatCells,
    contours,
    warnings,
  };
}
