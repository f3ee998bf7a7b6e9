/** CLI: render a pivotpart CSV into an SVG figure.
 *
 *   pivotpart-figures --in report.csv --kind tau_curves --out figure.svg
 *
 * Kinds: scatter (projection CSV; reads `<in>.sidecar.json` or --sidecar
 * for the boundary overlays), tau_curves, dim_curves (report CSV).
 * Exit codes: 0 ok, 1 usage, 2 schema mismatch, 3 I/O.
 */
import { existsSync, readFileSync, writeFileSync } from "node:fs";
import { parseArgs } from "node:util";

import { SchemaError } from "./csv.js";
import { Sidecar, parseSidecar, renderDimCurves, renderScatter, renderTauCurves } from "./figures.js";

const KINDS = ["scatter", "tau_curves", "dim_curves"] as const;

export function run(argv: string[]): number {
  let values: { in?: string; kind?: string; out?: string; sidecar?: string };
  try {
    ({ values } = parseArgs({
      args: argv,
      options: {
        in: { type: "string" },
        kind: { type: "string" },
        out: { type: "string" },
        sidecar: { type: "string" },
      },
    }));
  } catch (err) {
    console.error(`usage error: ${(err as Error).message}`);
    return 1;
  }
  const { in: input, kind, out } = values;
  if (!input || !out || !kind || !KINDS.includes(kind as (typeof KINDS)[number])) {
    console.error(`usage: --in <csv> --kind <${KINDS.join("|")}> --out <svg> [--sidecar <json>]`);
    return 1;
  }
  let csvText: string;
  let sidecar: Sidecar | undefined;
  try {
    csvText = readFileSync(input, "utf-8");
    if (kind === "scatter") {
      const sidecarPath = values.sidecar ?? `${input}.sidecar.json`;
      if (values.sidecar || existsSync(sidecarPath)) {
        sidecar = parseSidecar(readFileSync(sidecarPath, "utf-8"));
      }
    }
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${err.message}`);
      return 2;
    }
    console.error(`i/o error: ${(err as Error).message}`);
    return 3;
  }
  try {
    const svg = kind === "scatter" ? renderScatter(csvText, sidecar)
      : kind === "tau_curves" ? renderTauCurves(csvText)
      : renderDimCurves(csvText);
    writeFileSync(out, svg, "utf-8");
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${err.message}`);
      return 2;
    }
    console.error(`i/o error: ${(err as Error).message}`);
    return 3;
  }
  console.log(`wrote ${out}`);
  return 0;
}

process.exit(run(process.argv.slice(2)));
