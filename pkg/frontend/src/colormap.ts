/** Small fixed palette of colormaps for field heatmaps.
 *
 * Stops are 24 evenly spaced samples of the matplotlib palettes,
 * interpolated linearly in RGB; "gray" is the identity ramp.
 */

import { UsageError } from "./errors.js";

export type Rgb = readonly [number, number, number];

const VIRIDIS: Rgb[] = [
  [68, 1, 84], [71, 17, 100], [72, 32, 113], [71, 46, 124],
  [68, 59, 132], [63, 72, 137], [58, 84, 140], [52, 96, 141],
  [47, 108, 142], [42, 118, 142], [38, 129, 142], [34, 139, 141],
  [31, 149, 139], [31, 160, 136], [36, 170, 131], [47, 180, 124],
  [66, 190, 113], [88, 199, 101], [112, 207, 87], [139, 214, 70],
  [168, 219, 52], [197, 224, 33], [226, 228, 24], [253, 231, 37],
];

const MAGMA: Rgb[] = [
  [0, 0, 4], [6, 5, 24], [17, 12, 47], [30, 17, 73],
  [47, 17, 99], [66, 15, 117], [84, 19, 125], [101, 26, 128],
  [120, 34, 129], [137, 40, 129], [155, 46, 127], [173, 52, 124],
  [191, 58, 119], [208, 65, 111], [224, 76, 103], [237, 90, 95],
  [246, 110, 92], [251, 131, 95], [253, 152, 105], [254, 172, 118],
  [254, 193, 133], [254, 213, 151], [253, 233, 170], [252, 253, 191],
];

const GRAY: Rgb[] = [
  [0, 0, 0],
  [255, 255, 255],
];

export const COLORMAPS: Record<string, Rgb[]> = {
  viridis: VIRIDIS,
  magma: MAGMA,
  gray: GRAY,
};

export function colormapStops(name: string): Rgb[] {
  const stops = COLORMAPS[name];
  if (stops === undefined) {
    throw new UsageError(
      `unknown colormap "${name}" (have: ${Object.keys(COLORMAPS).join(", ")})`,
    );
  }
  return stops;
}

/** Color at t in [0, 1]; t is clamped, endpoints hit the end stops. */
export function sampleColormap(stops: Rgb[], t: number): Rgb {
  const clamped = Math.min(1, Math.max(0, t));
  const scaled = clamped * (stops.length - 1);
  const lo = Math.floor(scaled);
  const hi = Math.min(stops.length - 1, lo + 1);
  const frac = scaled - lo;
  return [
    Math.round(stops[lo][0] + frac * (stops[hi][0] - stops[lo][0])),
    Math.round(stops[lo][1] + frac * (stops[hi][1] - stops[lo][1])),
    Math.round(stops[lo][2] + frac * (stops[hi][2] - stops[lo][2])),
  ];
}
