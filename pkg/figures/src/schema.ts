/**
 * The benchmark CSV schema (the only interface to the primary package).
 *
 * One row per evaluated scenario, column order fixed by the producer:
 * scenario_id,kind,beta,latency_s,latency_local_s,latency_tx_s,
 * latency_server_s,energy_j,local_gmac,tx_bytes,encoder_bytes,
 * peak_local_bytes
 */

import Papa from "papaparse";

export const REQUIRED_COLUMNS = [
  "scenario_id",
  "kind",
  "beta",
  "latency_s",
  "latency_local_s",
  "latency_tx_s",
  "latency_server_s",
  "energy_j",
  "local_gmac",
  "tx_bytes",
  "encoder_bytes",
  "peak_local_bytes",
] as const;

export const METRICS = ["latency_s", "energy_j", "local_gmac"] as const;
export type Metric = (typeof METRICS)[number];

/** The CSV header is wrong or a cell does not parse. */
export class SchemaError extends Error {}

/** The CSV is structurally fine but carries nothing to plot. */
export class InputError extends Error {}

export interface BenchRow {
  scenarioId: string;
  kind: string;
  /** empty string in the CSV for configurations without one */
  beta: number | null;
  metrics: Record<Metric, number>;
}

/** Parse benchmark CSV text, preserving row order exactly. */
export function parseBench(csvText: string): BenchRow[] {
  const parsed = Papa.parse<Record<string, string>>(csvText.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const e = parsed.errors[0];
    throw new SchemaError(`CSV parse error at row ${e.row}: ${e.message}`);
  }
  const header = parsed.meta.fields ?? [];
  for (const column of REQUIRED_COLUMNS) {
    if (!header.includes(column)) {
      throw new SchemaError(`CSV is missing required column "${column}"`);
    }
  }
  if (parsed.data.length === 0) {
    throw new InputError("CSV has a header but no benchmark rows");
  }
  return parsed.data.map((raw, i) => {
    const metrics = {} as Record<Metric, number>;
    for (const m of METRICS) {
      const v = Number(raw[m]);
      if (!Number.isFinite(v)) {
        throw new SchemaError(`row ${i + 1}: ${m} is not a number: "${raw[m]}"`);
      }
      metrics[m] = v;
    }
    return {
      scenarioId: raw.scenario_id,
      kind: raw.kind,
      beta: raw.beta === "" ? null : Number(raw.beta),
      metrics,
    };
  });
}
