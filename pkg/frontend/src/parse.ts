/** Readers for run directories: locate and parse the txt output files. */

import { readFileSync, readdirSync } from "node:fs";
import { join } from "node:path";

import { GENERAL_COLUMNS, REGIONAL_COLUMNS } from "./schema.js";

export interface ParsedTable {
  /** Numeric cells by column name; non-numeric columns stay strings. */
  rows: Record<string, string>[];
  /** Lines that did not match the schema and were skipped. */
  malformed: number;
  /** Parameter tuple recovered from the file name, for figure footers. */
  paramTag: string;
  path: string;
}

export class RunDirError extends Error {}

export function findOutputFile(runDir: string, kind: string): string {
  const prefix = `temp_${kind}_`;
  const hits = readdirSync(runDir).filter(
    (f) => f.startsWith(prefix) && f.endsWith(".txt"),
  );
  if (hits.length === 0) {
    throw new RunDirError(`no ${kind} output file in ${runDir}`);
  }
  if (hits.length > 1) {
    throw new RunDirError(`ambiguous ${kind} outputs in ${runDir}: ${hits.join(", ")}`);
  }
  return join(runDir, hits[0]!);
}

function paramTagOf(path: string, kind: string): string {
  const base = path.split("/").pop() ?? "";
  return base.replace(`temp_${kind}_`, "").replace(/\.txt$/, "");
}

export function parseOutputFile(
  path: string,
  columns: readonly string[],
  kind: string,
): ParsedTable {
  const text = readFileSync(path, "utf-8");
  const rows: Record<string, string>[] = [];
  let malformed = 0;
  for (const line of text.split("\n")) {
    if (!line.trim()) continue;
    const cells = line.split(",");
    if (cells.length !== columns.length) {
      malformed += 1;
      continue;
    }
    const row: Record<string, string> = {};
    columns.forEach((name, i) => {
      row[name] = cells[i]!;
    });
    rows.push(row);
  }
  return { rows, malformed, paramTag: paramTagOf(path, kind), path };
}

export function readGeneral(runDir: string): ParsedTable {
  const path = findOutputFile(runDir, "general");
  return parseOutputFile(path, GENERAL_COLUMNS, "general");
}

export function readRegional(runDir: string): ParsedTable {
  const path = findOutputFile(runDir, "regional");
  return parseOutputFile(path, REGIONAL_COLUMNS, "regional");
}

/** Column as numbers, in file order. */
export function numericColumn(table: ParsedTable, name: string): number[] {
  return table.rows.map((r) => Number(r[name]));
}
