export { renderSvg } from "./figure.js";
export type { Figure, LineSeries, ReferenceLine, HeatCell, ContourLine } from "./figure.js";
export { buildTrajectoryFigure } from "./trajectories.js";
export { buildHeatmapFigure } from "./heatmap.js";
export { renyiHalfDivergence, recoveryBoundary } from "./divergence.js";
export { readTrajectoryCsv, readManifest, readGridCsv, SchemaError, SCHEMA_VERSION } from "./schema.js";
