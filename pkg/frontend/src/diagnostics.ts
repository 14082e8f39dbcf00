/** Reader for the simulator's diagnostics CSV.
 *
 * The file has a fixed 17-column header and floats printed with 17
 * significant digits, so parsing recovers the exact binary doubles.
 * The producer spells non-finite values the C way (nan, inf, -inf);
 * those parse to NaN and infinities rather than being rejected, since
 * a run that blew up is exactly the kind a viewer gets pointed at.
 */

import * as fs from "node:fs";

import Papa from "papaparse";

import { FormatError, InputError, UsageError } from "./errors.js";

export const CSV_COLUMNS = [
  "t",
  "energy",
  "grad_xi_sq",
  "z_xi_sq",
  "l2_ab",
  "l4_ab",
  "linf_ab",
  "min_a",
  "min_b",
  "div_u_res",
  "grad_struct_res",
  "vort_res",
  "besov_u_1inf",
  "h_u_s1",
  "h_z_s2",
  "h_xi_s2p1",
  "xi_inf",
] as const;

export interface DiagnosticsTable {
  columns: string[];
  /** rows[k][c] is column c of sample k, in header order. */
  rows: number[][];
}

const SPECIAL: Record<string, number> = {
  nan: Number.NaN,
  "-nan": Number.NaN,
  inf: Number.POSITIVE_INFINITY,
  "-inf": Number.NEGATIVE_INFINITY,
};

function parseCell(cell: string, row: number, column: string): number {
  const text = cell.trim();
  if (text in SPECIAL) {
    return SPECIAL[text];
  }
  const value = Number(text);
  if (text === "" || Number.isNaN(value)) {
    throw new FormatError(
      `row ${row}, column ${column}: ${JSON.stringify(cell)} is not a number`,
    );
  }
  return value;
}

export function parseDiagnostics(text: string): DiagnosticsTable {
  const parsed = Papa.parse<string[]>(text, { skipEmptyLines: true });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    throw new FormatError(`CSV parse error: ${first.message}`);
  }
  const lines = parsed.data;
  if (lines.length === 0) {
    throw new FormatError("CSV has no header row");
  }
  const header = lines[0];
  const expected = CSV_COLUMNS as readonly string[];
  if (header.length !== expected.length || header.some((h, i) => h !== expected[i])) {
    throw new FormatError(
      `unexpected CSV header [${header.join(", ")}], ` +
        `expected [${expected.join(", ")}]`,
    );
  }
  const rows: number[][] = [];
  for (let k = 1; k < lines.length; k++) {
    const cells = lines[k];
    if (cells.length !== expected.length) {
      throw new FormatError(
        `row ${k - 1} has ${cells.length} cells, expected ${expected.length}`,
      );
    }
    rows.push(cells.map((cell, c) => parseCell(cell, k - 1, expected[c])));
  }
  return { columns: [...expected], rows };
}

export function readDiagnosticsFile(path: string): DiagnosticsTable {
  let text: string;
  try {
    text = fs.readFileSync(path, "utf8");
  } catch (err) {
    throw new InputError(`cannot read CSV ${path}: ${(err as Error).message}`);
  }
  return parseDiagnostics(text);
}

/** One column as a plain array; unknown names are a usage error. */
export function columnValues(table: DiagnosticsTable, name: string): number[] {
  const index = table.columns.indexOf(name);
  if (index < 0) {
    throw new UsageError(
      `column "${name}" not in CSV header (have: ${table.columns.join(", ")})`,
    );
  }
  return table.rows.map((row) => row[index]);
}
