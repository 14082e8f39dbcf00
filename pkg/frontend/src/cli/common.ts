/** Shared CLI plumbing: error mapping and outcome printing. */

import { UsageError, ViewerError } from "../errors.js";
import type { PlotOutcome } from "../plots.js";

export function reportOutcome(outcome: PlotOutcome): number {
  for (const warning of outcome.warnings) {
    console.warn(`warning: ${warning}`);
  }
  for (const file of outcome.written) {
    console.log(`wrote ${file}`);
  }
  return 0;
}

export function runGuarded(body: () => number): number {
  try {
    return body();
  } catch (err) {
    if (err instanceof ViewerError) {
      console.error(`error: ${err.message}`);
      return err.exitCode;
    }
    throw err;
  }
}

/** yargs failures (unknown flag, missing option) become usage errors. */
export function asUsageError(err: unknown): never {
  throw new UsageError(err instanceof Error ? err.message : String(err));
}

export function splitColumns(cols: string): string[] {
  return cols
    .split(",")
    .map((name) => name.trim())
    .filter((name) => name !== "");
}
