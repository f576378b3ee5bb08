"""Inferring a composite success-rate distribution from constituent skills.

An exercise or composite skill succeeds with probability x = poly(a, b, ...)
where the a's are the constituent rates.  x is itself uncertain; its
distribution is projected onto the basis at a chosen inference order n_i by
taking expected values of the basis polynomials, which only needs moments
of x and therefore, under independence, products of per-skill moments.
The projection behaves like smoothing: the inferred mean sits at
1/2 + [n_i/(n_i+2)] * (E[x] - 1/2).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import basis, setup_dsl
from .basis import MAX_ORDER, BasisCoefficients, binomial_row
from .errors import MissingSkillDistributionError, OrderOverflowError
from .setup_dsl import ProbPolynomial


@dataclass(frozen=True)
class InferenceConfig:
    """n_i is the inference smoothing order; low values admit more doubt."""

    n_i: int = 10

    def __post_init__(self):
        if self.n_i < 1:
            raise ValueError("inference order must be at least 1")


def power_moments(poly: ProbPolynomial, dists: Mapping[str, BasisCoefficients],
                  m_max: int) -> np.ndarray:
    """E[x^m] for m = 0..m_max with x = poly under independent skills.

    Powers of the polynomial are built iteratively and each monomial's
    expectation factors into per-skill moments looked up from tables.
    """
    missing = poly.variables - set(dists)
    if missing:
        raise MissingSkillDistributionError(
            f"no distribution for skill(s): {sorted(missing)}"
        )
    tables = {
        s: basis.moment_table(dists[s], poly.degree(s) * m_max) for s in poly.variables
    }
    out = np.empty(m_max + 1)
    out[0] = 1.0
    current = ProbPolynomial.constant(1.0)
    for m in range(1, m_max + 1):
        current = current * poly
        total = 0.0
        for mono, coef in current.terms.items():
            term = coef
            for skill, exp in mono:
                term *= tables[skill][exp]
            total += term
        out[m] = total
    return out


def infer(poly: ProbPolynomial, dists: Mapping[str, BasisCoefficients],
          cfg: InferenceConfig = InferenceConfig()) -> BasisCoefficients:
    """Inferred distribution of the composite rate at order n_i.

    Coefficient i is E[g(i, n_i, x)] up to the common factor n_i + 1:
    expanding (1-x)^(n_i-i) binomially reduces it to an alternating sum of
    the moments of x.  Before normalization the coefficients already sum to
    one (the basis pdfs sum to n_i + 1), so normalization only clears
    round-off.
    """
    n_i = cfg.n_i
    if n_i * poly.max_degree() > MAX_ORDER:
        raise OrderOverflowError(
            f"inference at order {n_i} expands degree-{poly.max_degree()} "
            f"polynomials beyond the configured maximum {MAX_ORDER}"
        )
    mu = power_moments(poly, dists, n_i)
    row = binomial_row(n_i)
    out = np.empty(n_i + 1)
    for i in range(n_i + 1):
        tail = binomial_row(n_i - i)
        signs = (-1.0) ** np.arange(n_i - i + 1)
        out[i] = row[i] * np.sum(signs * tail * mu[i:])
    return basis.normalize(out)


def expected_success(poly: ProbPolynomial,
                     dists: Mapping[str, BasisCoefficients]) -> float:
    """E[x]: the mean success probability of the composite, unsmoothed.

    This is the number to quote as a prediction; the inferred distribution
    shrinks its mean toward 1/2 and would bias calibration.
    """
    return setup_dsl.expected_value(poly, dists)
