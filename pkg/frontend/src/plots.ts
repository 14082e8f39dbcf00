/** Batch driver: a PlotSpec in, image files out.
 *
 * The viewer is a strict consumer.  It reads the CSV and snapshot
 * artifacts and renders them; it never computes physics.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { colormapStops } from "./colormap.js";
import {
  columnValues,
  readDiagnosticsFile,
  type DiagnosticsTable,
} from "./diagnostics.js";
import { UsageError } from "./errors.js";
import { renderSnapshotField, type HeatmapOptions } from "./heatmap.js";
import { lineChartSvg } from "./linechart.js";
import { readSnapshotFile } from "./snapshot.js";

export interface PlotSpec {
  /** Diagnostics CSV to chart, if any. */
  csvPath?: string;
  /** Snapshot files to render, if any. */
  snapshotPaths: string[];
  /** Directory for the outputs (or one .png path, see below). */
  outDir: string;
  /** CSV columns to chart; empty means every column except t. */
  columns: string[];
  /** Field to render from each snapshot. */
  snapshotField?: string;
  colormap: string;
  /** Keep every k-th snapshot of a sequence (the first always). */
  frameStride: number;
  /** Heatmap cell size in pixels; default picks a side >= 256 px. */
  scale?: number;
}

export interface PlotOutcome {
  written: string[];
  warnings: string[];
}

/** Columns that must hold per the format whenever data is present. */
function chartColumns(table: DiagnosticsTable, requested: string[]): string[] {
  if (requested.length === 0) {
    return table.columns.filter((name) => name !== "t");
  }
  for (const name of requested) {
    if (!table.columns.includes(name)) {
      throw new UsageError(
        `column "${name}" not in CSV header (have: ${table.columns.join(", ")})`,
      );
    }
  }
  return requested;
}

export function plotDiagnostics(
  csvPath: string,
  requested: string[],
  outDir: string,
): PlotOutcome {
  const table = readDiagnosticsFile(csvPath);
  const columns = chartColumns(table, requested);
  fs.mkdirSync(outDir, { recursive: true });

  const written: string[] = [];
  const warnings: string[] = [];
  if (table.rows.length === 0) {
    warnings.push(`empty CSV (header only): charts from ${csvPath} have no data`);
  }
  const t = columnValues(table, "t");
  for (const column of columns) {
    const chart = lineChartSvg(t, columnValues(table, column), {
      title: `${column} over time`,
      yLabel: column,
      annotateIncreases: column === "energy",
    });
    const target = path.join(outDir, `${column}.svg`);
    fs.writeFileSync(target, chart.svg);
    written.push(target);
    if (chart.violations.length > 0) {
      warnings.push(
        `${column}: ${chart.violations.length} sample-to-sample increase` +
          `${chart.violations.length === 1 ? "" : "s"} flagged`,
      );
    }
  }
  return { written, warnings };
}

export function renderSnapshotToFile(
  snapshotPath: string,
  field: string,
  outPath: string,
  options: HeatmapOptions = {},
): string {
  const snap = readSnapshotFile(snapshotPath);
  const png = renderSnapshotField(snap, field, options);
  fs.mkdirSync(path.dirname(outPath), { recursive: true });
  fs.writeFileSync(outPath, png);
  return outPath;
}

function heatmapTarget(spec: PlotSpec, snapshotPath: string): string {
  const single = spec.snapshotPaths.length === 1;
  if (single && spec.outDir.endsWith(".png")) {
    return spec.outDir;
  }
  const base = path.basename(snapshotPath).replace(/\.enpp$/, "");
  return path.join(spec.outDir, `${base}_${spec.snapshotField}.png`);
}

export function runPlots(spec: PlotSpec): PlotOutcome {
  colormapStops(spec.colormap);
  if (!Number.isInteger(spec.frameStride) || spec.frameStride < 1) {
    throw new UsageError(`stride must be a positive integer, got ${spec.frameStride}`);
  }

  const written: string[] = [];
  const warnings: string[] = [];

  if (spec.csvPath !== undefined) {
    const outcome = plotDiagnostics(spec.csvPath, spec.columns, spec.outDir);
    written.push(...outcome.written);
    warnings.push(...outcome.warnings);
  }

  if (spec.snapshotPaths.length > 0) {
    const field = spec.snapshotField;
    if (field === undefined || field === "") {
      throw new UsageError("snapshot rendering needs a field name");
    }
    for (let k = 0; k < spec.snapshotPaths.length; k += spec.frameStride) {
      const snapshotPath = spec.snapshotPaths[k];
      written.push(
        renderSnapshotToFile(snapshotPath, field, heatmapTarget(spec, snapshotPath), {
          colormap: spec.colormap,
          scale: spec.scale,
        }),
      );
    }
  }

  return { written, warnings };
}
