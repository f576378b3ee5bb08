"""Success-rate distributions as weighted sums of beta-distribution pdfs.

A distribution over a success rate ``a`` in [0, 1] is represented by an
order ``n`` and coefficients ``c_0..c_n`` weighting the basis pdfs

    g(i, n, a) = (n + 1) * C(n, i) * a**i * (1 - a)**(n - i),

i.e. the pdf of Beta(i + 1, n - i + 1).  Normalized coefficients sum to
one, which makes the weighted sum itself a pdf.  Every transform in the
engine maps coefficient vectors to coefficient vectors, so this module is
the numerical foundation for everything else.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import AllZeroError, OrderOverflowError

# Stored orders are bounded by the largest smoothing order (120) plus the
# largest update polynomial order; 160 leaves headroom.  Exceeding it is an
# error, never a silent truncation.
MAX_ORDER = 160

NORMALIZATION_TOL = 1e-12


@lru_cache(maxsize=2048)
def binomial_row(n: int) -> np.ndarray:
    """C(n, 0..n) as a read-only float array, computed from exact integers."""
    row = np.array([math.comb(n, k) for k in range(n + 1)], dtype=float)
    row.flags.writeable = False
    return row


def basis_pdf(i: int, n: int, a):
    """Evaluate the basis pdf g(i, n, a); zero outside [0, 1]."""
    a = np.asarray(a, dtype=float)
    inside = (a >= 0.0) & (a <= 1.0)
    val = (n + 1) * math.comb(n, i) * np.where(inside, a, 0.0) ** i * np.where(inside, 1.0 - a, 0.0) ** (n - i)
    out = np.where(inside, val, 0.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class BasisCoefficients:
    """Coefficient vector over the beta basis pdfs of one common order."""

    coeffs: np.ndarray

    def __post_init__(self):
        arr = np.array(self.coeffs, dtype=float, copy=True)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("coefficients must be a non-empty 1-D sequence")
        if arr.size - 1 > MAX_ORDER:
            raise OrderOverflowError(
                f"order {arr.size - 1} exceeds the configured maximum {MAX_ORDER}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("coefficients must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "coeffs", arr)

    @property
    def order(self) -> int:
        return self.coeffs.size - 1

    @classmethod
    def flat(cls) -> "BasisCoefficients":
        """The no-information prior: order 0, pdf identically 1."""
        return cls(np.array([1.0]))

    def to_dict(self) -> dict:
        return {"order": self.order, "coeffs": [float(c) for c in self.coeffs]}

    @classmethod
    def from_dict(cls, payload: dict) -> "BasisCoefficients":
        coeffs = payload["coeffs"]
        if payload["order"] != len(coeffs) - 1:
            raise ValueError("order field does not match coefficient count")
        return cls(np.asarray(coeffs, dtype=float))

    def __repr__(self):  # pragma: no cover - debugging aid
        return f"BasisCoefficients(order={self.order}, coeffs={self.coeffs.tolist()})"


@dataclass(frozen=True, eq=False)
class CdfCoefficients:
    """Cumulative coefficients C_0..C_{n+1}; the CDF lives one order higher."""

    cum: np.ndarray

    def __post_init__(self):
        arr = np.array(self.cum, dtype=float, copy=True)
        arr.flags.writeable = False
        object.__setattr__(self, "cum", arr)

    @property
    def order(self) -> int:
        return self.cum.size - 1


def normalize(c: BasisCoefficients | Sequence[float] | np.ndarray) -> BasisCoefficients:
    """Clamp negative round-off to zero and rescale the sum to one.

    Raises AllZeroError when nothing positive remains, which signals a
    degenerate update the caller must not store.
    """
    arr = c.coeffs if isinstance(c, BasisCoefficients) else np.asarray(c, dtype=float)
    clamped = np.where(arr > 0.0, arr, 0.0)
    total = clamped.sum()
    if total <= 0.0:
        raise AllZeroError("all coefficients vanished; degenerate distribution")
    return BasisCoefficients(clamped / total)


def pdf_at(c: BasisCoefficients, a):
    """Evaluate the represented pdf at ``a`` (scalar or array); zero outside [0, 1]."""
    n = c.order
    aa = np.atleast_1d(np.asarray(a, dtype=float))
    out = np.zeros_like(aa)
    inside = (aa >= 0.0) & (aa <= 1.0)
    if np.any(inside):
        t = aa[inside]
        i = np.arange(n + 1)
        terms = t[:, None] ** i * (1.0 - t)[:, None] ** (n - i)
        out[inside] = (n + 1) * terms @ (binomial_row(n) * c.coeffs)
    return float(out[0]) if np.isscalar(a) or np.asarray(a).ndim == 0 else out


def mean(c: BasisCoefficients) -> float:
    """Expected success rate:  sum of c_i * (i + 1) / (n + 2)."""
    n = c.order
    return float(c.coeffs @ (np.arange(1, n + 2) / (n + 2)))


def moment(c: BasisCoefficients, m: int) -> float:
    """Raw moment E[a**m] via the multiplicative factorial-ratio recurrence."""
    if m < 0:
        raise ValueError("moment order must be non-negative")
    n = c.order
    w = c.coeffs.copy()
    i = np.arange(n + 1)
    for t in range(1, m + 1):
        w *= (i + t) / (n + 1 + t)
    return float(w.sum())


def moment_table(c: BasisCoefficients, m_max: int) -> np.ndarray:
    """E[a**m] for m = 0..m_max in one sweep; shares the recurrence of moment()."""
    n = c.order
    w = c.coeffs.copy()
    i = np.arange(n + 1)
    out = np.empty(m_max + 1)
    out[0] = w.sum()
    for t in range(1, m_max + 1):
        w *= (i + t) / (n + 1 + t)
        out[t] = w.sum()
    return out


def flip(c: BasisCoefficients) -> BasisCoefficients:
    """Distribution of the failure rate 1 - a: coefficients in reverse order."""
    return BasisCoefficients(c.coeffs[::-1])


def cdf(c: BasisCoefficients) -> CdfCoefficients:
    """Cumulative coefficients: C_i is the sum of c_j for j < i."""
    return CdfCoefficients(np.concatenate([[0.0], np.cumsum(c.coeffs)]))


def cdf_at(c: BasisCoefficients, a):
    """Evaluate the CDF at ``a``.

    The cumulative coefficients expand over basis pdfs one order higher,
    scaled by 1/(n + 2); that scale cancels the (n + 2) inside each basis
    pdf, leaving a plain Bernstein sum (flat prior gives F(a) = a).
    """
    n = c.order
    cum = cdf(c).cum
    aa = np.atleast_1d(np.asarray(a, dtype=float))
    out = np.zeros_like(aa)
    out[aa > 1.0] = 1.0
    inside = (aa >= 0.0) & (aa <= 1.0)
    if np.any(inside):
        t = aa[inside]
        i = np.arange(n + 2)
        terms = t[:, None] ** i * (1.0 - t)[:, None] ** (n + 1 - i)
        out[inside] = terms @ (binomial_row(n + 1) * cum)
    return float(out[0]) if np.isscalar(a) or np.asarray(a).ndim == 0 else out


def quantile(c: BasisCoefficients, q: float, tol: float = 1e-9) -> float:
    """Invert the CDF by bisection to within ``tol``."""
    if not 0.0 <= q <= 1.0:
        raise ValueError("quantile level must lie in [0, 1]")
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if cdf_at(c, mid) < q:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def convolve_in_basis(c1: np.ndarray, c2: np.ndarray) -> np.ndarray:
    """Unnormalized coefficients of the pointwise product of two basis expansions.

    For expansions of orders n1 and n2 the product has order n1 + n2 and

        out_k  proportional to  sum_j C(n1, k - j) C(n2, j) c1_{k-j} c2_j / C(n1 + n2, k),

    which is a plain convolution of binomial-weighted vectors.  Both the
    evidence-merging law and the general update law reduce to this product.
    """
    n1, n2 = len(c1) - 1, len(c2) - 1
    w = np.convolve(binomial_row(n1) * c1, binomial_row(n2) * c2)
    return w / binomial_row(n1 + n2)
