/** Field heatmaps: one snapshot field to a PNG buffer.
 *
 * The first grid axis runs down the image and the second across, so
 * pixel (row i, col j) is the node at x1 = i*h, x2 = j*h.  Values map
 * linearly from [min, max] onto the colormap; a constant field lands
 * on the middle color, and non-finite values get a magenta sentinel.
 */

import { colormapStops, sampleColormap, type Rgb } from "./colormap.js";
import { UsageError } from "./errors.js";
import { encodePng, type RgbImage } from "./png.js";
import type { Snapshot } from "./snapshot.js";

const SENTINEL: Rgb = [255, 0, 255];

/** Smallest integer upscale that makes the short side >= 256 px. */
export function autoScale(nPoints: number): number {
  return Math.max(1, Math.ceil(256 / nPoints));
}

export interface HeatmapOptions {
  colormap?: string;
  /** Integer pixel width of one grid cell; default from autoScale. */
  scale?: number;
}

export function fieldImage(
  values: Float64Array,
  nPoints: number,
  options: HeatmapOptions = {},
): RgbImage {
  const stops = colormapStops(options.colormap ?? "viridis");
  const scale = options.scale ?? autoScale(nPoints);
  if (!Number.isInteger(scale) || scale < 1) {
    throw new UsageError(`scale must be a positive integer, got ${scale}`);
  }

  let min = Number.POSITIVE_INFINITY;
  let max = Number.NEGATIVE_INFINITY;
  for (const v of values) {
    if (Number.isFinite(v)) {
      min = Math.min(min, v);
      max = Math.max(max, v);
    }
  }
  const flat = !(max > min);

  const side = nPoints * scale;
  const pixels = new Uint8Array(side * side * 3);
  for (let i = 0; i < nPoints; i++) {
    for (let j = 0; j < nPoints; j++) {
      const v = values[i * nPoints + j];
      let color: Rgb;
      if (!Number.isFinite(v)) {
        color = SENTINEL;
      } else {
        color = sampleColormap(stops, flat ? 0.5 : (v - min) / (max - min));
      }
      for (let di = 0; di < scale; di++) {
        const rowStart = ((i * scale + di) * side + j * scale) * 3;
        for (let dj = 0; dj < scale; dj++) {
          pixels[rowStart + 3 * dj] = color[0];
          pixels[rowStart + 3 * dj + 1] = color[1];
          pixels[rowStart + 3 * dj + 2] = color[2];
        }
      }
    }
  }
  return { width: side, height: side, pixels };
}

/**
 * Render one named field of a snapshot to PNG bytes.  The image title
 * (PNG tEXt "Title") carries the field name and time stamp.
 */
export function renderSnapshotField(
  snap: Snapshot,
  field: string,
  options: HeatmapOptions = {},
): Buffer {
  const values = snap.fields.get(field);
  if (values === undefined) {
    throw new UsageError(
      `no field "${field}" in snapshot (have: ${[...snap.fields.keys()].join(", ")})`,
    );
  }
  const image = fieldImage(values, snap.nPoints, options);
  let min = Number.POSITIVE_INFINITY;
  let max = Number.NEGATIVE_INFINITY;
  for (const v of values) {
    if (Number.isFinite(v)) {
      min = Math.min(min, v);
      max = Math.max(max, v);
    }
  }
  return encodePng(image, {
    Title: `${field} at t = ${snap.time}`,
    Description:
      `field ${field}, ${snap.nPoints}x${snap.nPoints} grid, ` +
      `range [${min}, ${max}], colormap ${options.colormap ?? "viridis"}`,
  });
}
