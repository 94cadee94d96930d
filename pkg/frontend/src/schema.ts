/**
 * Parsers for the chain-output file formats, with loud schema checks.
 *
 * These are pure consumers: nothing is recomputed beyond parsing, and any
 * drift in headers or the manifest schema version is a hard error.
 */

import { readFileSync } from "node:fs";

export const SCHEMA_VERSION = "1";
export const TRAJECTORY_HEADER = "iteration,log_posterior,loss,accepted";
export const GRID_HEADER =
  "p,q,n,replicates,mean_misclassified,renyi_half,signal_ratio,above_limit,skipped";

export interface TrajectoryRow {
  iteration: number;
  logPosterior: number;
  loss: number | null;
  accepted: boolean;
}

export interface ChainEntry {
  csv: string;
  seed: number;
}

export interface RunManifest {
  schemaVersion: string;
  experiment: string;
  truthLogPosterior: number | null;
  chains: ChainEntry[];
}

export interface GridCell {
  p: number;
  q: number;
  n: number;
  replicates: number;
  meanMisclassified: number | null;
  renyiHalf: number | null;
  signalRatio: number | null;
  aboveLimit: boolean | null;
  skipped: boolean;
}

export class SchemaError extends Error {}

function parseNumber(field: string, context: string): number {
  const value = Number(field);
  if (!Number.isFinite(value)) {
    throw new SchemaError(`${context}: expected a number, got "${field}"`);
  }
  return value;
}

export function readTrajectoryCsv(path: string): TrajectoryRow[] {
  const lines = readFileSync(path, "utf8").trim().split("\n");
  if (lines[0] !== TRAJECTORY_HEADER) {
    throw new SchemaError(
      `${path}: unexpected trajectory header "${lines[0]}" (want "${TRAJECTORY_HEADER}")`,
    );
  }
  return lines.slice(1).map((line, index) => {
    const fields = line.split(",");
    if (fields.length !== 4) {
      throw new SchemaError(`${path}:${index + 2}: expected 4 fields`);
    }
    return {
      iteration: parseNumber(fields[0], `${path}:${index + 2}`),
      logPosterior: parseNumber(fields[1], `${path}:${index + 2}`),
      loss: fields[2] === "" ? null : parseNumber(fields[2], `${path}:${index + 2}`),
      accepted: fields[3] === "1",
    };
  });
}

export function readManifest(path: string): RunManifest {
  let payload: Record<string, unknown>;
  try {
    payload = JSON.parse(readFileSync(path, "utf8")) as Record<string, unknown>;
  } catch (err) {
    throw new SchemaError(`${path}: not valid JSON (${String(err)})`);
  }
  const version = payload["schema_version"];
  if (version !== SCHEMA_VERSION) {
    throw new SchemaError(
      `${path}: schema_version ${JSON.stringify(version)} != "${SCHEMA_VERSION}"`,
    );
  }
  const rawChains = payload["chains"];
  const chains: ChainEntry[] = Array.isArray(rawChains)
    ? rawChains.map((entry) => {
        const record = entry as Record<string, unknown>;
        if (typeof record["csv"] !== "string") {
          throw new SchemaError(`${path}: chain entry without a csv field`);
        }
        return { csv: record["csv"], seed: Number(record["seed"] ?? 0) };
      })
    : [];
  const truth = payload["truth_log_posterior"];
  return {
    schemaVersion: String(version),
    experiment: String(payload["experiment"] ?? "unknown"),
    truthLogPosterior: typeof truth === "number" ? truth : null,
    chains,
  };
}

export function readGridCsv(path: string): GridCell[] {
  const lines = readFileSync(path, "utf8").trim().split("\n");
  if (lines[0] !== GRID_HEADER) {
    throw new SchemaError(
      `${path}: unexpected grid header "${lines[0]}" (want "${GRID_HEADER}")`,
    );
  }
  return lines.slice(1).map((line, index) => {
    const fields = line.split(",");
    if (fields.length !== 9) {
      throw new SchemaError(`${path}:${index + 2}: expected 9 fields`);
    }
    const context = `${path}:${index + 2}`;
    const skipped = fields[8] === "1";
    return {
      p: parseNumber(fields[0], context),
      q: parseNumber(fields[1], context),
      n: parseNumber(fields[2], context),
      replicates: parseNumber(fields[3], context),
      meanMisclassified: skipped ? null : parseNumber(fields[4], context),
      renyiHalf: skipped ? null : parseNumber(fields[5], context),
      signalRatio: skipped ? null : parseNumber(fields[6], context),
      aboveLimit: skipped ? null : fields[7] === "1",
      skipped,
    };
  });
}
