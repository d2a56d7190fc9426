/**
 * Strict reader for the simulator's CSV outputs.
 *
 * Files carry `# key=value` metadata lines, then a header row, then numeric
 * rows where empty cells mean "not measured". Column contracts are enforced
 * here so a mangled file fails with the offending column named.
 */

import Papa from "papaparse";

export interface CsvTable {
  metadata: Record<string, string>;
  columns: string[];
  /** row-major cells; null for empty cells */
  rows: (number | string | null)[][];
}

export class CsvContractError extends Error {}

export function parseCsv(text: string): CsvTable {
  const metadata: Record<string, string> = {};
  const lines = text.split(/\r?\n/);
  const dataLines: string[] = [];
  for (const line of lines) {
    if (line.startsWith("#")) {
      const body = line.slice(1).trim();
      const eq = body.indexOf("=");
      if (eq > 0) {
        metadata[body.slice(0, eq)] = body.slice(eq + 1);
      }
    } else if (line.trim() !== "") {
      dataLines.push(line);
    }
  }
  if (dataLines.length === 0) {
    throw new CsvContractError("CSV has no header row");
  }
  const parsed = Papa.parse<string[]>(dataLines.join("\n"), {
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    throw new CsvContractError(`CSV parse error: ${parsed.errors[0].message}`);
  }
  const [header, ...raw] = parsed.data;
  const columns = header.map((c) => c.trim());
  const rows = raw.map((cells) =>
    cells.map((cell) => {
      if (cell === "") return null;
      const num = Number(cell);
      return Number.isNaN(num) ? cell : num;
    }),
  );
  for (const [i, row] of rows.entries()) {
    if (row.length !== columns.length) {
      throw new CsvContractError(
        `row ${i + 1} has ${row.length} cells for ${columns.length} columns`,
      );
    }
  }
  return { metadata, columns, rows };
}

/** Assert the table carries every required column, naming the first missing one. */
export function requireColumns(table: CsvTable, required: string[]): void {
  for (const name of required) {
    if (!table.columns.includes(name)) {
      throw new CsvContractError(`missing required column: ${name}`);
    }
  }
}

export function columnIndex(table: CsvTable, name: string): number {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new CsvContractError(`missing required column: ${name}`);
  }
  return idx;
}

export function numberAt(
  row: (number | string | null)[],
  idx: number,
  column: string,
): number {
  const v = row[idx];
  if (typeof v !== "number") {
    throw new CsvContractError(`non-numeric value in column ${column}: ${v}`);
  }
  return v;
}
