import { cpSync, mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { renderSvg } from "../src/figure.js";
import { SchemaError } from "../src/schema.js";
import { buildTrajectoryFigure } from "../src/trajectories.js";

const BALANCED_DIR = join(__dirname, "fixtures", "balanced");

describe("buildTrajectoryFigure on the balanced run", () => {
  it("yields exactly 20 curve series and one reference line", () => {
    const figure = buildTrajectoryFigure(BALANCED_DIR);
    expect(figure.kind).toBe("trajectory");
    expect(figure.series).toHaveLength(20);
    expect(figure.referenceLines).toHaveLength(1);
    expect(figure.referenceLines[0].color).toBe("red");
    expect(figure.warnings).toHaveLength(0);
    for (const series of figure.series) {
      expect(series.color).toBe("black");
      expect(series.points.length).toBeGreaterThan(1);
      const iterations = series.points.map((p) => p.x);
      expect(iterations[0]).toBe(0);
      for (let i = 1; i < iterations.length; i++) {
        expect(iterations[i]).toBeGreaterThan(iterations[i - 1]);
      }
    }
  });

  it("places the reference line at the manifest truth value", () => {
    const manifest = JSON.parse(
      readFileSync(join(BALANCED_DIR, "manifest.json"), "utf8"),
    );
    const figure = buildTrajectoryFigure(BALANCED_DIR);
    expect(figure.referenceLines[0].y).toBe(manifest.truth_log_posterior);
  });

  it("renders one svg path per chain plus the reference line", () => {
    const figure = buildTrajectoryFigure(BALANCED_DIR);
    const svg = renderSvg(figure);
    expect(svg.match(/class="series"/g)).toHaveLength(20);
    expect(svg.match(/class="ref-line"/g)).toHaveLength(1);
    expect(svg.startsWith("<svg")).toBe(true);
  });
});

describe("degraded and failure modes", () => {
  function cloneFixture(): string {
    const dir = mkdtempSync(join(tmpdir(), "traj-"));
    cpSync(BALANCED_DIR, dir, { recursive: true });
    return dir;
  }

  it("omits the reference line with a warning when truth is missing", () => {
    const dir = cloneFixture();
    const manifestPath = join(dir, "manifest.json");
    const manifest = JSON.parse(readFileSync(manifestPath, "utf8"));
    delete manifest.truth_log_posterior;
    writeFileSync(manifestPath, JSON.stringify(manifest));
    const figure = buildTrajectoryFigure(dir);
    expect(figure.referenceLines).toHaveLength(0);
    expect(figure.warnings.length).toBeGreaterThan(0);
    expect(figure.series).toHaveLength(20);
  });

  it("fails loudly on a schema version mismatch", () => {
    const dir = cloneFixture();
    const manifestPath = join(dir, "manifest.json");
    const manifest = JSON.parse(readFileSync(manifestPath, "utf8"));
    manifest.schema_version = "999";
    writeFileSync(manifestPath, JSON.stringify(manifest));
    expect(() => buildTrajectoryFigure(dir)).toThrow(SchemaError);
  });

  it("fails loudly on a tampered trajectory header", () => {
    const dir = cloneFixture();
    const csvPath = join(dir, "trajectory_00.csv");
    const body = readFileSync(csvPath, "utf8").split("\n").slice(1);
    writeFileSync(csvPath, ["iteration,logpost,loss,acc", ...body].join("\n"));
    expect(() => buildTrajectoryFigure(dir)).toThrow(SchemaError);
  });
});
