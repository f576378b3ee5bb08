"""Relaxation of skill distributions over time and the decay schedule.

Knowledge decays between practice sessions.  The smoothing transform pulls
a distribution toward the flat prior through a joint prior that correlates
the stored rate with the present one; order n_s leaves correlation
n_s / (n_s + 2), so smaller orders forget more.  The schedule translates
elapsed time and practice count into a decay ratio and decomposes that
ratio into a short sequence of integer smoothing orders.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import basis
from .basis import BasisCoefficients, binomial_row

SECONDS_PER_YEAR = 365.25 * 24 * 3600.0
SECONDS_PER_MONTH = SECONDS_PER_YEAR / 12.0


@dataclass(frozen=True)
class DecayParams:
    """Forgetting-curve parameters.

    t_half: seconds of inactivity that halve the retained displacement.
    t_e0: initial equivalent inactive time for a student never seen before.
    n_half: practice count that halves the equivalent inactive time.
    n_s_max: largest smoothing order the schedule may emit.
    """

    t_half: float = SECONDS_PER_YEAR
    t_e0: float = 2.0 * SECONDS_PER_MONTH
    n_half: int = 8
    n_s_max: int = 120

    def __post_init__(self):
        if self.t_half <= 0 or self.t_e0 <= 0:
            raise ValueError("time constants must be positive")
        if self.n_half < 1 or self.n_s_max < 1:
            raise ValueError("count parameters must be at least 1")

    def to_dict(self) -> dict:
        return {
            "t_half": self.t_half,
            "t_e0": self.t_e0,
            "n_half": self.n_half,
            "n_s_max": self.n_s_max,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "DecayParams":
        return cls(**payload)


@dataclass(frozen=True)
class DecayPlan:
    """A target decay ratio decomposed into integer smoothing orders.

    Orders are stored largest first, which is their application order; the
    realized ratio is the product of n/(n+2) over the orders and never
    undershoots the target (residual decay beyond n_s_max is dropped).
    """

    target_ratio: float
    orders: tuple = field(default_factory=tuple)

    @property
    def realized_ratio(self) -> float:
        out = 1.0
        for n in self.orders:
            out *= n / (n + 2.0)
        return out


@lru_cache(maxsize=512)
def _smoothing_matrix(n_star: int, n_s: int) -> np.ndarray:
    """Mixing matrix M with M[i, j] = C(n_s,i) C(n*,j) / C(n*+n_s, i+j).

    Equal, up to a constant the normalization absorbs, to the textbook form
    C(i+j, i) C(n*+n_s-i-j, n*-j); this variant keeps every entry in (0, 1]
    so it stays finite at the largest configured orders.
    """
    rs = binomial_row(n_s)
    rj = binomial_row(n_star)
    denom = binomial_row(n_star + n_s)[np.add.outer(np.arange(n_s + 1), np.arange(n_star + 1))]
    m = np.outer(rs, rj) / denom
    m.flags.writeable = False
    return m


def smooth(c: BasisCoefficients, n_s: int) -> BasisCoefficients:
    """Relax a distribution toward flat; output order is n_s.

    The mean displacement from 1/2 shrinks by exactly n_s / (n_s + 2);
    n_s = 0 erases everything and returns the flat prior.
    """
    if n_s < 0:
        raise ValueError("smoothing order must be non-negative")
    if n_s == 0:
        return BasisCoefficients.flat()
    return basis.normalize(_smoothing_matrix(c.order, n_s) @ c.coeffs)


def decay_ratio(t_since: float, practice_count: int, p: DecayParams, *,
                include_learning_effect: bool = True) -> float:
    """Decay ratio for a skill idle for t_since seconds.

    Practice makes memories durable: the equivalent inactive time
    t_e = t_e0 * (1/2)^(count / n_half) is added to the idle time, and the
    ratio is (1/2)^((t + t_e) / t_half).  The t_e term charges for the
    disturbance the last exercise itself introduced, so it belongs on the
    carry from one observation to the next; a query between observations
    passes include_learning_effect=False and decays by real time only
    (identity at t_since = 0).
    """
    if t_since < 0:
        raise ValueError("time since last practice cannot be negative")
    t_e = 0.0
    if include_learning_effect:
        t_e = p.t_e0 * 0.5 ** (practice_count / p.n_half)
    return 0.5 ** ((t_since + t_e) / p.t_half)


def decompose(r: float, p: DecayParams) -> DecayPlan:
    """Split a target ratio into integer smoothing orders, largest first.

    Greedy: the next order is the smallest n with n/(n+2) >= r, i.e.
    ceil(2r/(1-r)); divide r by the realized n/(n+2) and repeat until the
    remainder is 1 (to 1e-12) or the needed order exceeds n_s_max, in which
    case the residual decay is dropped for this interval.
    """
    if not 0.0 < r <= 1.0:
        raise ValueError("decay ratio must lie in (0, 1]")
    target = r
    orders = []
    while r < 1.0 - 1e-12:
        # The epsilon guards against float fuzz pushing an exact ratio like
        # 18/20 = 0.9 up to the next integer.
        n = math.ceil(2.0 * r / (1.0 - r) - 1e-9)
        if n > p.n_s_max:
            break
        orders.append(n)
        r /= n / (n + 2.0)
    return DecayPlan(target, tuple(sorted(orders, reverse=True)))


def apply_decay(c: BasisCoefficients, t_since: float, practice_count: int,
                p: DecayParams, *, include_learning_effect: bool = True) -> BasisCoefficients:
    """Smooth once per scheduled order, largest first."""
    r = decay_ratio(t_since, practice_count, p,
                    include_learning_effect=include_learning_effect)
    plan = decompose(r, p)
    for n_s in plan.orders:
        c = smooth(c, n_s)
    return c
