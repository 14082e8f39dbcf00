/** `plot-diagnostics <csv> --cols energy,linf_ab --out <dir>`
 *
 * One SVG time series per requested column (default: every column
 * except t).  The energy chart circles any sample that rose above its
 * predecessor.  A header-only CSV draws empty frames, warns, and still
 * exits 0; an unknown column name exits 2 before anything is written.
 */

import yargs from "yargs";

import { asUsageError, reportOutcome, runGuarded, splitColumns } from "./common.js";
import { UsageError } from "../errors.js";
import { runPlots } from "../plots.js";

export function run(argv: string[]): number {
  return runGuarded(() => {
    let parsed;
    try {
      parsed = yargs(argv)
        .scriptName("plot-diagnostics")
        .usage("$0 <csv> --cols energy,linf_ab --out <dir>")
        .option("cols", {
          type: "string",
          default: "",
          describe: "comma-separated columns to chart (default: all except t)",
        })
        .option("out", {
          type: "string",
          demandOption: true,
          describe: "output directory for the SVG files",
        })
        .strictOptions()
        .exitProcess(false)
        .fail((msg, err) => {
          throw new UsageError(msg ?? (err ? err.message : "bad arguments"));
        })
        .parseSync();
    } catch (err) {
      if (err instanceof UsageError) {
        throw err;
      }
      asUsageError(err);
    }

    const positional = parsed._.map(String);
    if (positional.length !== 1) {
      throw new UsageError("expected exactly one CSV path");
    }

    return reportOutcome(
      runPlots({
        csvPath: positional[0],
        snapshotPaths: [],
        outDir: parsed.out,
        columns: splitColumns(parsed.cols),
        colormap: "viridis",
        frameStride: 1,
      }),
    );
  });
}
