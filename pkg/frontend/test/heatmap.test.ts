import { cpSync, mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { renyiHalfDivergence } from "../src/divergence.js";
import { renderSvg } from "../src/figure.js";
import { buildHeatmapFigure } from "../src/heatmap.js";
import { readGridCsv, SchemaError } from "../src/schema.js";

const HEATMAP_DIR = join(__dirname, "fixtures", "heatmap");
const GRID_CSV = join(HEATMAP_DIR, "grid.csv");

describe("buildHeatmapFigure", () => {
  it("draws one cell per grid row with skipped cells masked", () => {
    const rows = readGridCsv(GRID_CSV);
    const figure = buildHeatmapFigure(GRID_CSV);
    expect(figure.kind).toBe("heatmap");
    expect(figure.cells).toHaveLength(rows.length);
    const masked = figure.cells.filter((c) => c.value === null).length;
    expect(masked).toBe(rows.filter((r) => r.skipped).length);
    expect(masked).toBeGreaterThan(0); // the fixture grid has p <= q cells
  });

  it("overlays the recovery boundary matching the divergence formula", () => {
    const rows = readGridCsv(GRID_CSV);
    const n = rows[0].n;
    const figure = buildHeatmapFigure(GRID_CSV);
    expect(figure.contours).toHaveLength(1);
    const contour = figure.contours[0];
    expect(contour.color).toBe("red");
    expect(contour.points.length).toBeGreaterThan(10);
    const threshold = 2 * Math.log(n);
    for (const point of contour.points) {
      // contour carries (x=q, y=p); n * I at each point sits on the limit
      const value = n * renyiHalfDivergence(point.y, point.x);
      expect(Math.abs(value - threshold) / threshold).toBeLessThan(1e-6);
    }
  });

  it("marks grid cells consistently with the divergence threshold", () => {
    const rows = readGridCsv(GRID_CSV);
    for (const row of rows) {
      if (row.skipped) continue;
      const above = row.n * renyiHalfDivergence(row.p, row.q) >
        2 * Math.log(row.n);
      expect(row.aboveLimit).toBe(above);
    }
  });

  it("renders cells and the contour as svg elements", () => {
    const figure = buildHeatmapFigure(GRID_CSV);
    const svg = renderSvg(figure);
    const cellCount = (svg.match(/class="cell/g) ?? []).length;
    expect(cellCount).toBe(figure.cells.length);
    expect(svg.match(/class="contour"/g)).toHaveLength(1);
  });

  it("fails loudly when the manifest is missing or stale", () => {
    const dir = mkdtempSync(join(tmpdir(), "heat-"));
    cpSync(HEATMAP_DIR, dir, { recursive: true });
    const manifestPath = join(dir, "manifest.json");
    const manifest = JSON.parse(readFileSync(manifestPath, "utf8"));
    manifest.schema_version = "0";
    writeFileSync(manifestPath, JSON.stringify(manifest));
    expect(() => buildHeatmapFigure(join(dir, "grid.csv"))).toThrow(
      SchemaError,
    );
  });

  it("fails loudly on grid header drift", () => {
    const dir = mkdtempSync(join(tmpdir(), "heat-"));
    cpSync(HEATMAP_DIR, dir, { recursive: true });
    const gridPath = join(dir, "grid.csv");
    const lines = readFileSync(gridPath, "utf8").split("\n");
    lines[0] = "p,q,misclassified";
    writeFileSync(gridPath, lines.join("\n"));
    expect(() => buildHeatmapFigure(gridPath)).toThrow(SchemaError);
  });
});

describe("renyiHalfDivergence", () => {
  it("is zero at equal rates and positive otherwise", () => {
    expect(renyiHalfDivergence(0.3, 0.3)).toBeCloseTo(0, 12);
    expect(renyiHalfDivergence(0.3, 0.1)).toBeCloseTo(0.06725736938087549, 12);
  });

  it("rejects boundary rates", () => {
    expect(() => renyiHalfDivergence(0, 0.5)).toThrow();
    expect(() => renyiHalfDivergence(0.5, 1)).toThrow();
  });
});
