/** Client-side basis evaluation against hand-computed densities. */

import { describe, expect, it } from "vitest";
import {
  binomialRow,
  integratePdf,
  numericMean,
  pdfAt,
  samplePdf,
  type CoeffVector,
} from "../src/basis.js";

/** Small deterministic PRNG so the random checks are reproducible. */
function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function randomVector(rand: () => number, maxOrder = 20): CoeffVector {
  const order = Math.floor(rand() * (maxOrder + 1));
  const coeffs = Array.from({ length: order + 1 }, () => rand() + 1e-3);
  const total = coeffs.reduce((s, v) => s + v, 0);
  return { order, coeffs: coeffs.map((v) => v / total) };
}

describe("binomialRow", () => {
  it("matches exact binomial coefficients", () => {
    expect(Array.from(binomialRow(0))).toEqual([1]);
    expect(Array.from(binomialRow(4))).toEqual([1, 4, 6, 4, 1]);
    expect(binomialRow(10)[5]).toBe(252);
    expect(binomialRow(20)[10]).toBe(184756);
  });
});

describe("pdfAt", () => {
  it("is the constant 1 for the flat prior", () => {
    const flat = { order: 0, coeffs: [1] };
    for (const a of [0, 0.1, 0.5, 0.999, 1]) {
      expect(pdfAt(flat, a)).toBeCloseTo(1, 12);
    }
  });

  it("is zero outside the unit interval", () => {
    const flat = { order: 0, coeffs: [1] };
    expect(pdfAt(flat, -0.01)).toBe(0);
    expect(pdfAt(flat, 1.01)).toBe(0);
  });

  it("reproduces the density after 2 successes and 1 failure", () => {
    // Spike at index 2 of order 3: density 12 a^2 (1 - a).
    const c = { order: 3, coeffs: [0, 0, 1, 0] };
    for (const a of [0.1, 0.3, 0.6, 0.9]) {
      expect(pdfAt(c, a)).toBeCloseTo(12 * a * a * (1 - a), 12);
    }
  });
});

describe("integration", () => {
  it("normalized vectors integrate to one", () => {
    const rand = mulberry32(2026);
    for (let i = 0; i < 30; i++) {
      expect(integratePdf(randomVector(rand))).toBeCloseTo(1, 9);
    }
  });

  it("numeric mean matches the coefficient-form mean", () => {
    // Independent route: mean = sum c_i (i+1) / (n+2).
    const rand = mulberry32(777);
    for (let i = 0; i < 30; i++) {
      const c = randomVector(rand);
      const direct = c.coeffs.reduce((s, v, j) => s + (v * (j + 1)) / (c.order + 2), 0);
      expect(Math.abs(numericMean(c) - direct)).toBeLessThan(1e-9);
    }
  });

  it("one success from flat has mean 2/3", () => {
    expect(numericMean({ order: 1, coeffs: [0, 1] })).toBeCloseTo(2 / 3, 9);
  });
});

describe("samplePdf", () => {
  it("spans [0, 1] with the requested resolution", () => {
    const { x, y } = samplePdf({ order: 1, coeffs: [0, 1] }, 101);
    expect(x).toHaveLength(101);
    expect(x[0]).toBe(0);
    expect(x[100]).toBe(1);
    expect(y[0]).toBeCloseTo(0, 12);
    expect(y[100]).toBeCloseTo(2, 12);
  });
});
