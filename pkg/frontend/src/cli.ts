#!/usr/bin/env node
/**
 * Command line entry point: reads one observable CSV per scheme and writes
 * the two-panel comparison figure as an SVG file.
 *
 *   sstp-plots --primitive run_primitive.csv \
 *              --energy-conserving run_energy_conserving.csv \
 *              --output figure.svg [--title "spin-boson comparison"]
 */
import { readFileSync, writeFileSync } from "node:fs";
import { parseArgs } from "node:util";
import { CsvSchemaError, parseObservableCsv } from "./csv.js";
import { renderComparison } from "./figure.js";

export function main(argv: string[]): number {
  let values;
  try {
    ({ values } = parseArgs({
      args: argv,
      options: {
        primitive: { type: "string" },
        "energy-conserving": { type: "string" },
        output: { type: "string" },
        title: { type: "string" },
      },
      allowPositionals: false,
    }));
  } catch (err) {
    process.stderr.write(`error: ${(err as Error).message}\n`);
    return 2;
  }

  const missing = (["primitive", "energy-conserving", "output"] as const).filter(
    (k) => !values[k],
  );
  if (missing.length > 0) {
    process.stderr.write(
      `error: missing required option(s): ${missing.map((k) => `--${k}`).join(", ")}\n` +
        "usage: sstp-plots --primitive <csv> --energy-conserving <csv> --output <svg> [--title <text>]\n",
    );
    return 2;
  }

  try {
    const prim = parseObservableCsv(
      readFileSync(values.primitive!, "utf8"),
      values.primitive!,
    );
    const ec = parseObservableCsv(
      readFileSync(values["energy-conserving"]!, "utf8"),
      values["energy-conserving"]!,
    );
    const svg = renderComparison({
      primitive: prim,
      energyConserving: ec,
      title: values.title,
    });
    writeFileSync(values.output!, svg, "utf8");
  } catch (err) {
    if (err instanceof CsvSchemaError) {
      process.stderr.write(`error: ${err.message}\n`);
      return 1;
    }
    if (err instanceof Error && "code" in err) {
      process.stderr.write(`error: ${err.message}\n`);
      return 1;
    }
    throw err;
  }
  return 0;
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
