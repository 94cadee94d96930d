/**
 * Serializable figure object model plus an SVG renderer.
 *
 * Figures are built as plain data first so tests can assert on series
 * counts, reference lines, and contour points before any rendering happens.
 */

export interface Point {
  x: number;
  y: number;
}

export interface LineSeries {
  kind: "line";
  label: string;
  color: string;
  points: Point[];
}

export interface ReferenceLine {
  kind: "ref-line";
  label: string;
  color: string;
  y: number;
}

export interface HeatCell {
  x0: number;
  x1: number;
  y0: number;
  y1: number;
  /** null marks a masked (skipped) cell */
  value: number | null;
}

export interface ContourLine {
  kind: "contour";
  label: string;
  color: string;
  points: Point[];
}

export interface Figure {
  kind: "trajectory" | "heatmap";
  title: string;
  xLabel: string;
  yLabel: string;
  series: LineSeries[];
  referenceLines: ReferenceLine[];
  cells: HeatCell[];
  contours: ContourLine[];
  warnings: string[];
}

export interface RenderOptions {
  width?: number;
  height?: number;
}

interface Extent {
  xMin: number;
  xMax: number;
  yMin: number;
  yMax: number;
}

const MARGIN = { top: 40, right: 24, bottom: 48, left: 86 };

function figureExtent(figure: Figure): Extent {
  const xs: number[] = [];
  const ys: number[] = [];
  for (const s of figure.series) {
    for (const p of s.points) {
      xs.push(p.x);
      ys.push(p.y);
    }
  }
  for (const r of figure.referenceLines) ys.push(r.y);
  for (const c of figure.cells) {
    xs.push(c.x0, c.x1);
    ys.push(c.y0, c.y1);
  }
  for (const c of figure.contours) {
    for (const p of c.points) {
      xs.push(p.x);
      ys.push(p.y);
    }
  }
  if (xs.length === 0 || ys.length === 0) {
    throw new Error("cannot render an empty figure");
  }
  const pad = (lo: number, hi: number): [number, number] =>
    lo === hi ? [lo - 1, hi + 1] : [lo, hi];
  const [xMin, xMax] = pad(Math.min(...xs), Math.max(...xs));
  const [yMin, yMax] = pad(Math.min(...ys), Math.max(...ys));
  return { xMin, xMax, yMin, yMax };
}

function colorForValue(value: number, vMax: number): string {
  // white -> dark red ramp, matching "more misclassified = hotter"
  const t = vMax > 0 ? Math.min(value / vMax, 1) : 0;
  const channel = Math.round(255 - 175 * t);
  return `rgb(255,${channel},${channel - 40 > 0 ? channel - 40 : 0})`;
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Render the figure to a standalone SVG document. */
export function renderSvg(figure: Figure, options: RenderOptions = {}): string {
  const width = options.width ?? 720;
  const height = options.height ?? 480;
  const extent = figureExtent(figure);
  const plotW = width - MARGIN.left - MARGIN.right;
  const plotH = height - MARGIN.top - MARGIN.bottom;
  const sx = (x: number): number =>
    MARGIN.left + ((x - extent.xMin) / (extent.xMax - extent.xMin)) * plotW;
  const sy = (y: number): number =>
    MARGIN.top + plotH - ((y - extent.yMin) / (extent.yMax - extent.yMin)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  parts.push(
    `<text x="${width / 2}" y="20" text-anchor="middle" font-size="15" font-family="sans-serif">${escapeXml(figure.title)}</text>`,
  );

  const vMax = Math.max(
    1,
    ...figure.cells.filter((c) => c.value !== null).map((c) => c.value as number),
  );
  for (const cell of figure.cells) {
    const x = sx(cell.x0);
    const y = sy(cell.y1);
    const w = sx(cell.x1) - sx(cell.x0);
    const h = sy(cell.y0) - sy(cell.y1);
    const fill = cell.value === null ? "#bbbbbb" : colorForValue(cell.value, vMax);
    const cls = cell.value === null ? "cell masked" : "cell";
    parts.push(
      `<rect class="${cls}" x="${x.toFixed(2)}" y="${y.toFixed(2)}" width="${w.toFixed(2)}" height="${h.toFixed(2)}" fill="${fill}" stroke="#888" stroke-width="0.4"/>`,
    );
  }

  for (const series of figure.series) {
    const path = series.points
      .map((p, i) => `${i === 0 ? "M" : "L"}${sx(p.x).toFixed(2)} ${sy(p.y).toFixed(2)}`)
      .join(" ");
    parts.push(
      `<path class="series" data-label="${escapeXml(series.label)}" d="${path}" fill="none" stroke="${series.color}" stroke-width="1"/>`,
    );
  }

  for (const ref of figure.referenceLines) {
    const y = sy(ref.y).toFixed(2);
    parts.push(
      `<line class="ref-line" data-label="${escapeXml(ref.label)}" x1="${MARGIN.left}" y1="${y}" x2="${MARGIN.left + plotW}" y2="${y}" stroke="${ref.color}" stroke-width="1.5"/>`,
    );
  }

  for (const contour of figure.contours) {
    const path = contour.points
      .map((p, i) => `${i === 0 ? "M" : "L"}${sx(p.x).toFixed(2)} ${sy(p.y).toFixed(2)}`)
      .join(" ");
    parts.push(
      `<path class="contour" data-label="${escapeXml(contour.label)}" d="${path}" fill="none" stroke="${contour.color}" stroke-width="2"/>`,
    );
  }

  // axes
  parts.push(
    `<line x1="${MARGIN.left}" y1="${MARGIN.top + plotH}" x2="${MARGIN.left + plotW}" y2="${MARGIN.top + plotH}" stroke="black"/>`,
    `<line x1="${MARGIN.left}" y1="${MARGIN.top}" x2="${MARGIN.left}" y2="${MARGIN.top + plotH}" stroke="black"/>`,
  );
  const ticks = 5;
  for (let i = 0; i <= ticks; i++) {
    const xv = extent.xMin + ((extent.xMax - extent.xMin) * i) / ticks;
    const yv = extent.yMin + ((extent.yMax - extent.yMin) * i) / ticks;
    parts.push(
      `<text x="${sx(xv).toFixed(2)}" y="${MARGIN.top + plotH + 18}" text-anchor="middle" font-size="11" font-family="sans-serif">${formatTick(xv)}</text>`,
      `<text x="${MARGIN.left - 8}" y="${(sy(yv) + 4).toFixed(2)}" text-anchor="end" font-size="11" font-family="sans-serif">${formatTick(yv)}</text>`,
    );
  }
  parts.push(
    `<text x="${MARGIN.left + plotW / 2}" y="${height - 10}" text-anchor="middle" font-size="13" font-family="sans-serif">${escapeXml(figure.xLabel)}</text>`,
    `<text x="18" y="${MARGIN.top + plotH / 2}" text-anchor="middle" font-size="13" font-family="sans-serif" transform="rotate(-90 18 ${MARGIN.top + plotH / 2})">${escapeXml(figure.yLabel)}</text>`,
  );
  parts.push("</svg>");
  return parts.join("\n");
}

function formatTick(value: number): string {
  if (value === 0) return "0";
  const magnitude = Math.abs(value);
  if (magnitude >= 10000 || magnitude < 0.01) return value.toExponential(1);
  if (Number.isInteger(value)) return value.toString();
  return value.toPrecision(3);
}
