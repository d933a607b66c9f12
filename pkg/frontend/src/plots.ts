/** Figure builders: general series, per-region series, multi-run bands. */

import { mkdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { numericColumn, readGeneral, readRegional, RunDirError } from "./parse.js";
import type { ParsedTable } from "./parse.js";
import { GENERAL_MEASURES, REGIONAL_MEASURES } from "./schema.js";
import { interquartileBand, medianSeries, trimHead } from "./series.js";
import { renderLineChart } from "./svg.js";

export interface PlotJob {
  runDir: string;
  /** Fraction of leading months excluded from the figures. */
  trim?: number;
  /** Defaults to <runDir>/figures. */
  outDir?: string;
}

export interface PlotReport {
  files: string[];
  warnings: number;
}

function outDirOf(job: PlotJob): string {
  const dir = job.outDir ?? join(job.runDir, "figures");
  mkdirSync(dir, { recursive: true });
  return dir;
}

function requireRows(table: ParsedTable, what: string): void {
  if (table.rows.length === 0) {
    throw new RunDirError(`${what} (${table.path}) holds no usable rows`);
  }
}

export function plotGeneral(job: PlotJob): PlotReport {
  const trim = job.trim ?? 0;
  const table = readGeneral(job.runDir);
  requireRows(table, "general output");
  const dir = outDirOf(job);
  const months = trimHead(numericColumn(table, "month"), trim);
  const files: string[] = [];
  for (const measure of GENERAL_MEASURES) {
    const values = trimHead(numericColumn(table, measure), trim);
    const svg = renderLineChart({
      title: measure,
      yLabel: measure,
      footer: table.paramTag,
      series: [{ label: measure, x: months, y: values }],
    });
    const path = join(dir, `general_${measure}.svg`);
    writeFileSync(path, svg);
    files.push(path);
  }
  return { files, warnings: table.malformed };
}

export function plotRegional(job: PlotJob): PlotReport {
  const trim = job.trim ?? 0;
  const table = readRegional(job.runDir);
  requireRows(table, "regional output");
  const dir = outDirOf(job);

  const allMonths = [...new Set(table.rows.map((r) => Number(r["month"])))].sort(
    (a, b) => a - b,
  );
  const months = trimHead(allMonths, trim);
  const regionIds = [...new Set(table.rows.map((r) => r["region_id"]!))].sort();
  const files: string[] = [];
  for (const measure of REGIONAL_MEASURES) {
    const series = regionIds.map((rid) => {
      const byMonth = new Map<number, number>();
      for (const row of table.rows) {
        if (row["region_id"] === rid) {
          byMonth.set(Number(row["month"]), Number(row[measure]));
        }
      }
      // A region missing a month leaves a gap rather than interpolating.
      const y = months.map((m) => (byMonth.has(m) ? byMonth.get(m)! : NaN));
      return { label: rid, x: months, y };
    });
    const svg = renderLineChart({
      title: `${measure} by region`,
      yLabel: measure,
      footer: table.paramTag,
      series,
    });
    const path = join(dir, `regional_${measure}.svg`);
    writeFileSync(path, svg);
    files.push(path);
  }
  return { files, warnings: table.malformed };
}

export interface MultiPlotJob {
  runDirs: string[];
  trim?: number;
  outDir?: string;
}

export function plotMulti(job: MultiPlotJob): PlotReport {
  if (job.runDirs.length < 2) {
    throw new RunDirError("multi-run figures need at least two run directories");
  }
  const trim = job.trim ?? 0;
  const tables = job.runDirs.map((dir) => readGeneral(dir));
  tables.forEach((t, i) => requireRows(t, `general output of run ${job.runDirs[i]}`));
  const schema = tables[0]!.paramTag;
  for (const [i, table] of tables.entries()) {
    if (table.rows.length !== tables[0]!.rows.length) {
      throw new RunDirError(
        `schema mismatch: ${job.runDirs[i]} has ${table.rows.length} months, ` +
          `expected ${tables[0]!.rows.length}`,
      );
    }
  }
  const dir = job.outDir ?? join(job.runDirs[0]!, "figures");
  mkdirSync(dir, { recursive: true });

  const months = trimHead(numericColumn(tables[0]!, "month"), trim);
  const files: string[] = [];
  let warnings = 0;
  for (const table of tables) warnings += table.malformed;

  for (const measure of GENERAL_MEASURES) {
    const runs = tables.map((t) => trimHead(numericColumn(t, measure), trim));
    const med = medianSeries(runs);
    const band = interquartileBand(runs);
    const series = runs.map((y, i) => ({ label: `run ${i}`, x: months, y }));
    series.push({ label: "median", x: months, y: med });
    const svg = renderLineChart({
      title: `${measure} across ${runs.length} runs`,
      yLabel: measure,
      footer: schema,
      series,
      band: { x: months, lower: band.lower, upper: band.upper },
    });
    const path = join(dir, `multi_${measure}.svg`);
    writeFileSync(path, svg);
    files.push(path);
  }
  return { files, warnings };
}
