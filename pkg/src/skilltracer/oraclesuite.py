"""Batch comparison of every update law against the brute-force oracles.

Each operation is exercised on freshly drawn random inputs and compared to
an independent reference route: quadrature posteriors for the observation
laws, the direct smoothing integral, pointwise pdf products for merging,
and tensor-product quadrature for inference.  The suite reports the worst
L1 coefficient distance per operation so a single drifting formula is
immediately visible.  Shipped with the library (not test-only) so any
deployment can re-verify its arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import basis, fusion, inference, observe, oracle, smoothing
from .inference import InferenceConfig
from .observe import HPolynomial
from .setup_dsl import compile_setup, parse

L1_THRESHOLD = 1e-6
DEFAULT_CASES = 200
DEFAULT_SEED = 1211


@dataclass(frozen=True)
class OpResult:
    op: str
    cases: int
    max_l1: float
    threshold: float = L1_THRESHOLD

    @property
    def ok(self) -> bool:
        return self.max_l1 <= self.threshold

    def to_dict(self) -> dict:
        return {
            "op": self.op,
            "cases": self.cases,
            "max_l1": self.max_l1,
            "threshold": self.threshold,
            "ok": self.ok,
        }


def _random_coeffs(rng, max_order=12):
    n = rng.integers(0, max_order + 1)
    return basis.normalize(rng.random(n + 1) + 1e-3)


def _random_h(rng, max_degree=3):
    # Marginals of set-up polynomials have Bernstein coefficients in [0, 1].
    d = int(rng.integers(0, max_degree + 1))
    return HPolynomial.from_bernstein(rng.random(d + 1))


def _l1(got, ref) -> float:
    return float(np.abs(got.coeffs - ref.coeffs).sum())


def _check_update_binary(rng, points) -> float:
    c = _random_coeffs(rng)
    outcome = "success" if rng.random() < 0.5 else "failure"
    lik = (lambda a: a) if outcome == "success" else (lambda a: 1 - a)
    got = observe.update_binary(c, outcome)
    x, post = oracle.quad_posterior(c, lik, points=points)
    return _l1(got, oracle.fit_coefficients((x, post), got.order))


def _check_update_general(rng, points) -> float:
    c = _random_coeffs(rng)
    h = _random_h(rng)
    got = observe.update_general(c, h)
    x, post = oracle.quad_posterior(c, h.value_at, points=points)
    return _l1(got, oracle.fit_coefficients((x, post), got.order))


def _check_smooth(rng, points) -> float:
    c = _random_coeffs(rng)
    n_s = int(rng.integers(1, 17))
    got = smoothing.smooth(c, n_s)
    x, post = oracle.quad_smooth(c, n_s, points=points)
    return _l1(got, oracle.fit_coefficients((x, post), got.order))


def _check_merge(rng, points) -> float:
    # Merging is the Bayes product: treat the second pdf as a likelihood.
    c1 = _random_coeffs(rng)
    c2 = _random_coeffs(rng)
    got = fusion.merge(c1, c2)
    x, post = oracle.quad_posterior(c1, lambda a: basis.pdf_at(c2, a),
                                    points=points)
    return _l1(got, oracle.fit_coefficients((x, post), got.order))


# Fixed set-up pool with hand-written vectorized evaluators; the lambdas
# are the independent semantics the compiled polynomials must reproduce.
_INFER_POOL = (
    ("and(A, B)", ("A", "B"), lambda a, b: a * b),
    ("or(A, B)", ("A", "B"), lambda a, b: a + b - a * b),
    ("and(A, or(A, B))", ("A", "B"), lambda a, b: a * a + a * b - a * a * b),
    ("pick(A, B)", ("A", "B"), lambda a, b: 0.5 * (a + b)),
    ("and(A, part(B, 0.7))", ("A", "B"), lambda a, b: a * (0.3 + 0.7 * b)),
    ("and(A, or(B, C))", ("A", "B", "C"), lambda a, b, c: a * (b + c - b * c)),
)


def _check_infer(rng, points) -> float:
    del points  # tensor quadrature sets its own resolution
    setup, skills, fn = _INFER_POOL[int(rng.integers(0, len(_INFER_POOL)))]
    poly = compile_setup(parse(setup))
    dists = {s: _random_coeffs(rng, max_order=4) for s in skills}
    n_i = int(rng.integers(1, 13))
    got = inference.infer(poly, dists, InferenceConfig(n_i))
    ref = oracle.infer_reference(fn, [dists[s] for s in skills], n_i, nodes=24)
    return _l1(got, ref)


_OPS = (
    ("update_binary", _check_update_binary),
    ("update_general", _check_update_general),
    ("smooth", _check_smooth),
    ("merge", _check_merge),
    ("infer", _check_infer),
)


def run_suite(cases: int = DEFAULT_CASES, seed: int = DEFAULT_SEED,
              points: int = 2001) -> list:
    """Worst oracle deviation per operation over ``cases`` random draws."""
    results = []
    for index, (name, check) in enumerate(_OPS):
        rng = np.random.default_rng([seed, index])
        worst = 0.0
        for _ in range(cases):
            worst = max(worst, check(rng, points))
        results.append(OpResult(op=name, cases=cases, max_l1=worst))
    return results
