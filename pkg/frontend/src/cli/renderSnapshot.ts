/** `render-snapshot <file> --field n --out <png>`
 *
 * Heatmap of one field of a snapshot.  With several snapshot files,
 * --out names a directory, each image is <basename>_<field>.png, and
 * --stride keeps every k-th frame of the sequence.
 */

import yargs from "yargs";

import { asUsageError, reportOutcome, runGuarded } from "./common.js";
import { UsageError } from "../errors.js";
import { runPlots } from "../plots.js";

export function run(argv: string[]): number {
  return runGuarded(() => {
    let parsed;
    try {
      parsed = yargs(argv)
        .scriptName("render-snapshot")
        .usage("$0 <file...> --field n --out <png or dir>")
        .option("field", {
          type: "string",
          demandOption: true,
          describe: "field name to render (as stored in the snapshot)",
        })
        .option("out", {
          type: "string",
          demandOption: true,
          describe: "output PNG path (one input) or directory",
        })
        .option("colormap", {
          type: "string",
          default: "viridis",
          describe: "viridis, magma, or gray",
        })
        .option("stride", {
          type: "number",
          default: 1,
          describe: "with several inputs, render every k-th snapshot",
        })
        .option("scale", {
          type: "number",
          describe: "pixels per grid cell (default targets a 256 px side)",
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

    const paths = parsed._.map(String);
    if (paths.length === 0) {
      throw new UsageError("expected at least one snapshot path");
    }

    return reportOutcome(
      runPlots({
        snapshotPaths: paths,
        outDir: parsed.out,
        columns: [],
        snapshotField: parsed.field,
        colormap: parsed.colormap,
        frameStride: parsed.stride,
        scale: parsed.scale,
      }),
    );
  });
}
