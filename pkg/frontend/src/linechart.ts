/** SVG time-series charts for diagnostics columns.
 *
 * Pure string assembly: no DOM, no canvas.  Each chart is a framed
 * plot area with light gridlines, nice-valued ticks (d3-array), a
 * polyline through the finite samples, and an optional monotonicity
 * annotation that circles every sample that rose above its
 * predecessor (used for the energy column, which is supposed to be
 * non-increasing whenever the charge hypothesis holds).
 */

import { ticks as niceTicks } from "d3-array";

const WIDTH = 880;
const HEIGHT = 460;
const MARGIN = { top: 48, right: 28, bottom: 54, left: 84 } as const;

/** Relative slack before a rise counts as a violation; rounding-level
 * wiggle on a flat curve should not light up the chart. */
const RISE_TOLERANCE = 1e-12;

export interface LineChartOptions {
  title: string;
  yLabel: string;
  annotateIncreases?: boolean;
}

export interface LineChart {
  svg: string;
  /** Sample indices whose value rose above the previous sample. */
  violations: number[];
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function fmt(value: number): string {
  return String(Number(value.toPrecision(6)));
}

interface Scale {
  lo: number;
  hi: number;
  toPx(value: number): number;
}

function makeScale(lo: number, hi: number, pxLo: number, pxHi: number): Scale {
  if (!(hi > lo)) {
    const pad = Math.max(Math.abs(lo) * 0.05, 0.5);
    lo -= pad;
    hi += pad;
  }
  const span = hi - lo;
  return {
    lo,
    hi,
    toPx: (value: number) => pxLo + ((value - lo) / span) * (pxHi - pxLo),
  };
}

export function findIncreases(values: number[]): number[] {
  const out: number[] = [];
  for (let k = 1; k < values.length; k++) {
    const prev = values[k - 1];
    const next = values[k];
    if (!Number.isFinite(prev) || !Number.isFinite(next)) {
      continue;
    }
    if (next - prev > RISE_TOLERANCE * Math.max(1, Math.abs(prev))) {
      out.push(k);
    }
  }
  return out;
}

export function lineChartSvg(
  t: number[],
  values: number[],
  options: LineChartOptions,
): LineChart {
  const body: string[] = [];
  const plotLeft = MARGIN.left;
  const plotRight = WIDTH - MARGIN.right;
  const plotTop = MARGIN.top;
  const plotBottom = HEIGHT - MARGIN.bottom;

  body.push(
    `<rect x="0" y="0" width="${WIDTH}" height="${HEIGHT}" fill="white"/>`,
    `<text x="${WIDTH / 2}" y="${MARGIN.top - 20}" text-anchor="middle" ` +
      `font-size="18" font-family="sans-serif">${escapeXml(options.title)}</text>`,
  );

  const finite: Array<[number, number, number]> = [];
  for (let k = 0; k < t.length; k++) {
    if (Number.isFinite(t[k]) && Number.isFinite(values[k])) {
      finite.push([t[k], values[k], k]);
    }
  }

  let violations: number[] = [];
  if (finite.length === 0) {
    body.push(
      `<rect x="${plotLeft}" y="${plotTop}" width="${plotRight - plotLeft}" ` +
        `height="${plotBottom - plotTop}" fill="none" stroke="#888"/>`,
      `<text x="${(plotLeft + plotRight) / 2}" y="${(plotTop + plotBottom) / 2}" ` +
        `text-anchor="middle" font-size="16" font-family="sans-serif" ` +
        `fill="#888">no data rows</text>`,
    );
  } else {
    const xs = finite.map((p) => p[0]);
    const ys = finite.map((p) => p[1]);
    const x = makeScale(Math.min(...xs), Math.max(...xs), plotLeft, plotRight);
    const y = makeScale(Math.min(...ys), Math.max(...ys), plotBottom, plotTop);

    for (const tick of niceTicks(x.lo, x.hi, 6)) {
      const px = x.toPx(tick);
      body.push(
        `<line x1="${px.toFixed(2)}" y1="${plotTop}" x2="${px.toFixed(2)}" ` +
          `y2="${plotBottom}" stroke="#ddd"/>`,
        `<text x="${px.toFixed(2)}" y="${plotBottom + 20}" text-anchor="middle" ` +
          `font-size="12" font-family="sans-serif">${fmt(tick)}</text>`,
      );
    }
    for (const tick of niceTicks(y.lo, y.hi, 6)) {
      const py = y.toPx(tick);
      body.push(
        `<line x1="${plotLeft}" y1="${py.toFixed(2)}" x2="${plotRight}" ` +
          `y2="${py.toFixed(2)}" stroke="#ddd"/>`,
        `<text x="${plotLeft - 8}" y="${(py + 4).toFixed(2)}" text-anchor="end" ` +
          `font-size="12" font-family="sans-serif">${fmt(tick)}</text>`,
      );
    }
    body.push(
      `<rect x="${plotLeft}" y="${plotTop}" width="${plotRight - plotLeft}" ` +
        `height="${plotBottom - plotTop}" fill="none" stroke="#888"/>`,
    );

    const points = finite
      .map(([tv, v]) => `${x.toPx(tv).toFixed(2)},${y.toPx(v).toFixed(2)}`)
      .join(" ");
    body.push(
      `<polyline points="${points}" fill="none" stroke="#1f77b4" stroke-width="1.8"/>`,
    );

    if (options.annotateIncreases) {
      violations = findIncreases(values);
      const byIndex = new Map(finite.map(([tv, v, k]) => [k, [tv, v] as const]));
      for (const k of violations) {
        const point = byIndex.get(k);
        if (point === undefined) {
          continue;
        }
        body.push(
          `<circle cx="${x.toPx(point[0]).toFixed(2)}" ` +
            `cy="${y.toPx(point[1]).toFixed(2)}" r="5" fill="none" ` +
            `stroke="#d62728" stroke-width="2"/>`,
        );
      }
      if (violations.length > 0) {
        body.push(
          `<text x="${plotRight}" y="${plotTop - 8}" text-anchor="end" ` +
            `font-size="13" font-family="sans-serif" fill="#d62728">` +
            `${violations.length} monotonicity violation` +
            `${violations.length === 1 ? "" : "s"}</text>`,
        );
      }
    }
  }

  body.push(
    `<text x="${(plotLeft + plotRight) / 2}" y="${HEIGHT - 14}" ` +
      `text-anchor="middle" font-size="14" font-family="sans-serif">t</text>`,
    `<text transform="rotate(-90 20 ${(plotTop + plotBottom) / 2})" x="20" ` +
      `y="${(plotTop + plotBottom) / 2}" text-anchor="middle" font-size="14" ` +
      `font-family="sans-serif">${escapeXml(options.yLabel)}</text>`,
  );

  const svg =
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" ` +
    `height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">\n` +
    body.join("\n") +
    "\n</svg>\n";
  return { svg, violations };
}
