/**
 * Client-side evaluation of skill distributions.
 *
 * The server ships each posterior as a coefficient vector over beta pdfs
 * g_{i,n}(a) = (n+1) C(n,i) a^i (1-a)^(n-i).  The dashboard only ever
 * evaluates this form for display; it never mutates coefficients.  A
 * numerical mean is provided so views can cross-check the rendered curve
 * against the server-reported mean.
 */

export interface CoeffVector {
  order: number;
  coeffs: number[];
}

const rowCache = new Map<number, Float64Array>();

/** C(n, 0..n), built multiplicatively; cached per order. */
export function binomialRow(n: number): Float64Array {
  const hit = rowCache.get(n);
  if (hit) return hit;
  const row = new Float64Array(n + 1);
  row[0] = 1;
  for (let i = 0; i < n; i++) {
    row[i + 1] = (row[i] * (n - i)) / (i + 1);
  }
  rowCache.set(n, row);
  return row;
}

/** Density of the represented distribution at a; zero outside [0, 1]. */
export function pdfAt(c: CoeffVector, a: number): number {
  if (a < 0 || a > 1) return 0;
  const n = c.order;
  const row = binomialRow(n);
  // Accumulate a^i forward and (1-a)^(n-i) via a backward pass, so each
  // term costs one multiply instead of two pow() calls.
  const b = 1 - a;
  let total = 0;
  let pa = 1;
  const pb = new Float64Array(n + 1);
  pb[n] = 1;
  for (let i = n - 1; i >= 0; i--) pb[i] = pb[i + 1] * b;
  for (let i = 0; i <= n; i++) {
    total += c.coeffs[i] * row[i] * pa * pb[i];
    pa *= a;
  }
  return (n + 1) * total;
}

/** Sample the pdf on an even grid, for charting. */
export function samplePdf(c: CoeffVector, samples = 161): { x: number[]; y: number[] } {
  const x: number[] = [];
  const y: number[] = [];
  for (let i = 0; i < samples; i++) {
    const a = i / (samples - 1);
    x.push(a);
    y.push(pdfAt(c, a));
  }
  return { x, y };
}

function simpson(f: (a: number) => number, points: number): number {
  const n = points % 2 === 0 ? points + 1 : points;
  const h = 1 / (n - 1);
  let total = 0;
  for (let i = 0; i < n; i++) {
    const w = i === 0 || i === n - 1 ? 1 : i % 2 === 1 ? 4 : 2;
    total += w * f(i * h);
  }
  return (total * h) / 3;
}

/** Integral of the pdf over [0, 1]; 1 for any normalized vector. */
export function integratePdf(c: CoeffVector, points = 4001): number {
  return simpson((a) => pdfAt(c, a), points);
}

/**
 * Mean computed by integrating a * pdf(a) numerically.  This is the guard
 * the views use: it must agree with the server's mean field to 1e-6, or
 * the client-side basis evaluation has drifted from the server's.
 */
export function numericMean(c: CoeffVector, points = 4001): number {
  return simpson((a) => a * pdfAt(c, a), points);
}
