"""Combining independent evidence streams and correlated-skill evidence.

Conditionally independent estimates of the same skill multiply pointwise;
in the basis that is the same binomial-weighted convolution as the general
update, with the flat prior as neutral element.  Evidence from a correlated
skill is first relaxed through the shared joint prior (plain smoothing at
the correlation order) and groups sharing one prior combine element-wise.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from . import basis, smoothing
from .basis import BasisCoefficients, convolve_in_basis
from .errors import OrderMismatchError

DEFAULT_CORRELATION_ORDER = 5
MAX_CORRELATION_ORDER = 10


def merge(d1: BasisCoefficients, d2: BasisCoefficients) -> BasisCoefficients:
    """Fuse two independent estimates: pdf_out proportional to pdf1 * pdf2.

    Output order is the sum of the input orders.  Raises AllZeroError if
    the inputs contradict each other everywhere (disjoint point masses).
    """
    return basis.normalize(convolve_in_basis(d1.coeffs, d2.coeffs))


def merge_all(dists: Sequence[BasisCoefficients]) -> BasisCoefficients:
    """Left fold of merge; merging order does not matter."""
    if not dists:
        return BasisCoefficients.flat()
    out = dists[0]
    for d in dists[1:]:
        out = merge(out, d)
    return out


def correlate(d: BasisCoefficients, n_c: int) -> BasisCoefficients:
    """Relax another skill's estimate through the shared joint prior.

    Mathematically identical to smoothing at order n_c: what a correlated
    skill says about this one weakens by n_c / (n_c + 2).
    """
    return smoothing.smooth(d, n_c)


def combine_group(smoothed: Sequence[BasisCoefficients]) -> BasisCoefficients:
    """Combine estimates that share one joint prior: element-wise product.

    All inputs must already be correlate-smoothed to one common order;
    the product is normalized.  A flat member contributes equal
    coefficients and drops out.
    """
    if not smoothed:
        raise ValueError("combine_group needs at least one distribution")
    orders = {d.order for d in smoothed}
    if len(orders) > 1:
        raise OrderMismatchError(
            f"correlated-group members must share one order, got {sorted(orders)}"
        )
    out = np.ones(smoothed[0].order + 1)
    for d in smoothed:
        out *= d.coeffs
    return basis.normalize(out)
