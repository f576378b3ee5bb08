/**
 * SVG geometry for distribution cards: pure functions from coefficient
 * payloads to path strings and layout rectangles, so they are testable
 * without a DOM.
 */

import { pdfAt, samplePdf, type CoeffVector } from "./basis.js";

export interface Layout {
  width: number;
  height: number;
  pad: number;
}

export const CARD_LAYOUT: Layout = { width: 260, height: 120, pad: 10 };

function sx(a: number, layout: Layout): number {
  return layout.pad + a * (layout.width - 2 * layout.pad);
}

function sy(v: number, yMax: number, layout: Layout): number {
  const usable = layout.height - 2 * layout.pad;
  return layout.height - layout.pad - (v / yMax) * usable;
}

export interface Curve {
  path: string;
  /** density value mapped to the top of the plot */
  yMax: number;
}

/** Polyline through the sampled pdf; yMax can be shared across cards. */
export function pdfPath(c: CoeffVector, layout: Layout = CARD_LAYOUT, samples = 161, yMax?: number): Curve {
  const { x, y } = samplePdf(c, samples);
  const top = yMax ?? Math.max(...y, 1e-9) * 1.05;
  const parts: string[] = [];
  for (let i = 0; i < x.length; i++) {
    const px = sx(x[i], layout).toFixed(2);
    const py = sy(Math.min(y[i], top), top, layout).toFixed(2);
    parts.push(`${i === 0 ? "M" : "L"}${px},${py}`);
  }
  return { path: parts.join(" "), yMax: top };
}

/** Closed region under the curve, for a soft fill. */
export function pdfArea(c: CoeffVector, layout: Layout = CARD_LAYOUT, samples = 161, yMax?: number): Curve {
  const line = pdfPath(c, layout, samples, yMax);
  const y0 = sy(0, line.yMax, layout).toFixed(2);
  const x0 = sx(0, layout).toFixed(2);
  const x1 = sx(1, layout).toFixed(2);
  return { path: `${line.path} L${x1},${y0} L${x0},${y0} Z`, yMax: line.yMax };
}

/** Horizontal extent of the credible interval in plot coordinates. */
export function bandRect(interval: [number, number], layout: Layout = CARD_LAYOUT): { x: number; width: number } {
  const lo = sx(interval[0], layout);
  const hi = sx(interval[1], layout);
  return { x: lo, width: Math.max(0, hi - lo) };
}

/** Plot x of the mean marker. */
export function meanX(mean: number, layout: Layout = CARD_LAYOUT): number {
  return sx(mean, layout);
}

/** Tick positions and labels for the success-rate axis. */
export function axisTicks(layout: Layout = CARD_LAYOUT, count = 5): { x: number; label: string }[] {
  const ticks: { x: number; label: string }[] = [];
  for (let i = 0; i < count; i++) {
    const a = i / (count - 1);
    ticks.push({ x: sx(a, layout), label: a.toFixed(2) });
  }
  return ticks;
}

/** Density at the mean, handy for marker placement. */
export function densityAt(c: CoeffVector, a: number): number {
  return pdfAt(c, a);
}
