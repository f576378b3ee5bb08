"""Incorporating exercise outcomes into skill distributions.

A success observed directly on one skill multiplies the pdf by ``a``, a
failure by ``1 - a``; both stay inside the basis representation and raise
the order by one.  For an exercise that touches several skills, the other
skills are integrated out of the success polynomial first, leaving a
one-variable likelihood polynomial h(a) that generalizes the binary law.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Mapping

import numpy as np

from . import basis
from .basis import BasisCoefficients, binomial_row, convolve_in_basis
from .errors import MalformedPolynomialError, MissingSkillDistributionError
from .setup_dsl import ProbPolynomial

Outcome = Literal["success", "failure"]


def update_binary(c: BasisCoefficients, outcome: Outcome) -> BasisCoefficients:
    """Posterior after one direct success or failure on the skill.

    Success: c*_i = i * c_{i-1}; failure: c*_i = (n + 1 - i) * c_i.  The
    order grows by one and the result is normalized.  A point mass that the
    outcome contradicts (all mass at 0 observed as success) normalizes to
    nothing and raises AllZeroError.
    """
    n = c.order
    out = np.zeros(n + 2)
    if outcome == "success":
        out[1:] = np.arange(1, n + 2) * c.coeffs
    elif outcome == "failure":
        out[: n + 1] = np.arange(n + 1, 0, -1) * c.coeffs
    else:
        raise ValueError(f"outcome must be 'success' or 'failure', got {outcome!r}")
    return basis.normalize(out)


@dataclass(frozen=True)
class HPolynomial:
    """One-variable likelihood polynomial in power and Bernstein form.

    ``power_coeffs`` k_0..k_n give h(a) = sum k_j a^j; ``bernstein_coeffs``
    k'_0..k'_n give the same function over C(n,i) a^i (1-a)^(n-i).  The
    update law consumes the Bernstein form.
    """

    power_coeffs: np.ndarray
    bernstein_coeffs: np.ndarray

    def __post_init__(self):
        k = np.array(self.power_coeffs, dtype=float, copy=True)
        kb = np.array(self.bernstein_coeffs, dtype=float, copy=True)
        if k.shape != kb.shape or k.ndim != 1 or k.size == 0:
            raise ValueError("power and Bernstein coefficients must be matching 1-D vectors")
        k.flags.writeable = False
        kb.flags.writeable = False
        object.__setattr__(self, "power_coeffs", k)
        object.__setattr__(self, "bernstein_coeffs", kb)

    @property
    def order(self) -> int:
        return self.power_coeffs.size - 1

    @classmethod
    def from_power(cls, k) -> "HPolynomial":
        k = np.asarray(k, dtype=float)
        return cls(k, to_bernstein(k))

    @classmethod
    def from_bernstein(cls, kb) -> "HPolynomial":
        kb = np.asarray(kb, dtype=float)
        n = kb.size - 1
        k = np.zeros(n + 1)
        for i, w in enumerate(kb):
            term = np.array([1.0])
            for _ in range(i):
                term = np.polynomial.polynomial.polymul(term, [0.0, 1.0])
            for _ in range(n - i):
                term = np.polynomial.polynomial.polymul(term, [1.0, -1.0])
            k[: term.size] += w * binomial_row(n)[i] * term
        return cls(k, kb)

    def value_at(self, a):
        a = np.asarray(a, dtype=float)
        return np.polynomial.polynomial.polyval(a, self.power_coeffs)


def to_bernstein(k) -> np.ndarray:
    """Convert power-basis coefficients to Bernstein coefficients.

    C(n,i) * k'_i = sum over j <= i of C(n-j, n-i) * k_j, which makes both
    forms agree pointwise on [0, 1].
    """
    k = np.asarray(k, dtype=float)
    n = k.size - 1
    out = np.empty(n + 1)
    for i in range(n + 1):
        total = sum(binomial_row(n - j)[n - i] * k[j] for j in range(i + 1))
        out[i] = total / binomial_row(n)[i]
    return out


def marginal_h(poly: ProbPolynomial, skill: str, outcome: Outcome,
               others: Mapping[str, BasisCoefficients]) -> HPolynomial:
    """Likelihood of the outcome as a polynomial in one skill's rate.

    The success polynomial is averaged over every other skill's current
    distribution (independence), leaving h(a) = E[x(a, ...)] on success and
    1 - that on failure.  The polynomial's degree in the skill fixes the
    order even when averaging makes a leading coefficient vanish.
    """
    missing = (poly.variables - {skill}) - set(others)
    if missing:
        raise MissingSkillDistributionError(
            f"no distribution for skill(s): {sorted(missing)}"
        )
    n_p = poly.degree(skill)
    tables = {
        s: basis.moment_table(others[s], poly.degree(s))
        for s in poly.variables
        if s != skill
    }
    k = np.zeros(n_p + 1)
    for mono, coef in poly.terms.items():
        power = 0
        weight = coef
        for s, e in mono:
            if s == skill:
                power = e
            else:
                weight *= tables[s][e]
        k[power] += weight
    if outcome == "failure":
        k = -k
        k[0] += 1.0
    elif outcome != "success":
        raise ValueError(f"outcome must be 'success' or 'failure', got {outcome!r}")
    return HPolynomial.from_power(k)


def check_h_range(h: HPolynomial, samples: int = 101) -> None:
    """Sanity check that h stays inside [0, 1]; a materially negative value
    means the polynomial was not a success probability at all."""
    vals = h.value_at(np.linspace(0.0, 1.0, samples))
    if np.min(vals) < -1e-8 or np.max(vals) > 1.0 + 1e-8:
        raise MalformedPolynomialError(
            f"likelihood polynomial leaves [0,1]: range [{vals.min():.3g}, {vals.max():.3g}]"
        )


def update_general(c: BasisCoefficients, h: HPolynomial) -> BasisCoefficients:
    """Posterior proportional to h(a) times the current pdf.

    Multiplying two Bernstein-form expansions is a binomial-weighted
    convolution; the output order is the sum of the input orders and the
    result is normalized (constants in h cancel).  The canonical h(a) = a
    and h(a) = 1 - a are dispatched to update_binary so the reduction holds
    bit-for-bit, not merely to round-off.
    """
    kb = h.bernstein_coeffs
    if kb.size == 2 and kb[0] == 0.0 and kb[1] == 1.0:
        return update_binary(c, "success")
    if kb.size == 2 and kb[0] == 1.0 and kb[1] == 0.0:
        return update_binary(c, "failure")
    raw = convolve_in_basis(c.coeffs, kb)
    return basis.normalize(raw)
