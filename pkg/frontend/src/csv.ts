/** Strict CSV reading for the report and projection files.
 *
 * The producers emit plain comma-separated values without quoting, so the
 * parser doubles as the schema gate: an unexpected header, a ragged row,
 * or an empty body raises SchemaError and the CLI exits nonzero.
 */

export class SchemaError extends Error {}

export interface Table {
  header: string[];
  rows: string[][];
}

export function parseCsv(text: string, expectedHeader: readonly string[]): Table {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new SchemaError("empty CSV");
  }
  const header = lines[0].split(",");
  if (header.length !== expectedHeader.length ||
      expectedHeader.some((name, i) => header[i] !== name)) {
    throw new SchemaError(
      `header mismatch: expected "${expectedHeader.join(",")}", got "${lines[0]}"`);
  }
  const rows = lines.slice(1).map((line, i) => {
    const cells = line.split(",");
    if (cells.length !== header.length) {
      throw new SchemaError(`row ${i + 1} has ${cells.length} cells, expected ${header.length}`);
    }
    return cells;
  });
  if (rows.length === 0) {
    throw new SchemaError("CSV has a header but no data rows");
  }
  return { header, rows };
}

export function toNumber(cell: string, what: string): number {
  const value = Number(cell);
  if (cell.trim() === "" || !Number.isFinite(value)) {
    throw new SchemaError(`${what} is not a finite number: "${cell}"`);
  }
  return value;
}
