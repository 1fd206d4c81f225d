/**
 * Reader for the simulator's observable CSV contract:
 *
 *   t,mean,stderr,weight_var,n_eff
 *
 * one row per recorded time, numeric columns only.  Parsing is strict: a
 * missing or extra column, a non-numeric cell or an empty table is an error
 * that names the offending column or line.
 */

export const REQUIRED_COLUMNS = ["t", "mean", "stderr", "weight_var", "n_eff"] as const;

export type ColumnName = (typeof REQUIRED_COLUMNS)[number];

export interface ObservableSeries {
  t: number[];
  mean: number[];
  stderr: number[];
  weight_var: number[];
  n_eff: number[];
}

export class CsvSchemaError extends Error {}

export function parseObservableCsv(text: string, source = "<csv>"): ObservableSeries {
  const lines = text
    .split(/\r?\n/)
    .map((l) => l.trim())
    .filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new CsvSchemaError(`${source}: empty file`);
  }
  const header = (lines[0] ?? "").split(",").map((h) => h.trim());
  for (const col of REQUIRED_COLUMNS) {
    if (!header.includes(col)) {
      throw new CsvSchemaError(
        `${source}: missing required column '${col}' (header: ${header.join(",")})`,
      );
    }
  }
  const extra = header.filter((h) => !(REQUIRED_COLUMNS as readonly string[]).includes(h));
  if (extra.length > 0) {
    throw new CsvSchemaError(`${source}: unexpected column(s) ${extra.join(", ")}`);
  }
  const index = new Map(header.map((h, i) => [h, i]));
  const series: ObservableSeries = { t: [], mean: [], stderr: [], weight_var: [], n_eff: [] };
  for (let r = 1; r < lines.length; r++) {
    const cells = (lines[r] ?? "").split(",");
    if (cells.length !== header.length) {
      throw new CsvSchemaError(
        `${source}:${r + 1}: expected ${header.length} cells, found ${cells.length}`,
      );
    }
    for (const col of REQUIRED_COLUMNS) {
      const raw = cells[index.get(col)!] ?? "";
      const value = Number(raw);
      if (raw.trim() === "" || Number.isNaN(value)) {
        throw new CsvSchemaError(`${source}:${r + 1}: non-numeric value '${raw}' in column '${col}'`);
      }
      series[col].push(value);
    }
  }
  if (series.t.length === 0) {
    throw new CsvSchemaError(`${source}: no data rows`);
  }
  return series;
}

/**
 * Checks that two series live on the same time grid where they overlap.
 * A shorter series is allowed (a run truncated earlier renders on the shared
 * axis); a grid that disagrees at any shared index is refused.
 */
export function assertSharedTimeGrid(
  a: ObservableSeries,
  b: ObservableSeries,
  aName = "first",
  bName = "second",
): void {
  const n = Math.min(a.t.length, b.t.length);
  for (let i = 0; i < n; i++) {
    const ta = a.t[i]!;
    const tb = b.t[i]!;
    if (Math.abs(ta - tb) > 1e-12 * Math.max(1, Math.abs(ta))) {
      throw new CsvSchemaError(
        `mismatched time grids: ${aName} has t=${ta} but ${bName} has t=${tb} at row ${i}`,
      );
    }
  }
}
