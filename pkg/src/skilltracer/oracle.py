"""Brute-force validators for every coefficient formula in the engine.

Nothing here shares code with the closed-form update rules: posteriors and
smoothing are computed by Simpson quadrature on dense grids, expectations of
polynomial functions of several skills by tensor-product Gauss-Legendre
quadrature or seeded Monte-Carlo, and grid pdfs are mapped back to basis
coefficients by least squares.  The engine is correct exactly insofar as it
agrees with this module; it ships with the package so the comparisons can be
re-run at any time.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import simpson

from . import basis
from .basis import BasisCoefficients
from .errors import NonConvergenceError

# Simpson needs an odd point count; 4001 keeps the rule's h^4 error near 1e-13
# for the smooth integrands that arise here.
MIN_GRID = 2001
DEFAULT_GRID = 4001


def _grid(points: int) -> np.ndarray:
    if points < MIN_GRID:
        raise ValueError(f"grid must have at least {MIN_GRID} points")
    if points % 2 == 0:
        points += 1
    return np.linspace(0.0, 1.0, points)


def _pdf_values(pdf, x: np.ndarray) -> np.ndarray:
    if isinstance(pdf, BasisCoefficients):
        return basis.pdf_at(pdf, x)
    return np.asarray(pdf(x), dtype=float)


def _basis_matrix(order: int, x: np.ndarray) -> np.ndarray:
    """Column i holds the basis pdf g(i, order, x)."""
    i = np.arange(order + 1)
    cols = x[:, None] ** i * (1.0 - x)[:, None] ** (order - i)
    return (order + 1) * cols * basis.binomial_row(order)


def quad_posterior(pdf, likelihood: Callable, points: int = DEFAULT_GRID):
    """Normalized pointwise product prior * likelihood on a dense grid.

    Returns (x, posterior values).  The integral is re-checked on a grid of
    twice the resolution; disagreement means the integrand is too rough for
    the rule and raises NonConvergenceError instead of returning a bad
    reference value.
    """

    def compute(n):
        x = _grid(n)
        raw = _pdf_values(pdf, x) * np.asarray(likelihood(x), dtype=float)
        total = simpson(raw, x=x)
        if total <= 0.0:
            raise NonConvergenceError("posterior mass vanished on the grid")
        return x, raw / total

    x, post = compute(points)
    x2, post2 = compute(2 * points - 1)
    if np.max(np.abs(post - post2[::2])) > 1e-8 * max(1.0, np.max(np.abs(post))):
        raise NonConvergenceError("posterior did not stabilize under grid refinement")
    return x, post


def quad_smooth(pdf, n_s: int, points: int = DEFAULT_GRID):
    """Relaxed pdf by direct integration against the joint prior.

    The joint density of the stored rate a and the reference rate b is
    (1/(n_s+1)) * sum_k g(k,n_s,a) g(k,n_s,b), whose marginals are flat.
    Conditioning on the stored distribution and integrating a out gives the
    relaxed distribution of b on the grid, with no use of the closed-form
    coefficient mixing rule.
    """

    def compute(n):
        x = _grid(n)
        f = _pdf_values(pdf, x)
        g = _basis_matrix(n_s, x)
        inner = simpson(f[:, None] * g, x=x, axis=0)
        out = g @ inner / (n_s + 1)
        total = simpson(out, x=x)
        return x, out / total

    x, out = compute(points)
    _, out2 = compute(2 * points - 1)
    if np.max(np.abs(out - out2[::2])) > 1e-8 * max(1.0, np.max(np.abs(out))):
        raise NonConvergenceError("smoothing integral did not stabilize")
    return x, out


def mc_expect(fn: Callable, dists: Sequence[BasisCoefficients], samples: int,
              seed: int = 0) -> tuple[float, float]:
    """Monte-Carlo estimate of E[fn(a_1, ..., a_k)] with standard error.

    Each skill is sampled by first picking a mixture component in proportion
    to its coefficients and then drawing from the matching beta distribution.
    """
    rng = np.random.default_rng(seed)
    draws = []
    for d in dists:
        n = d.order
        comp = rng.choice(n + 1, size=samples, p=d.coeffs / d.coeffs.sum())
        draws.append(rng.beta(comp + 1.0, n - comp + 1.0))
    vals = np.asarray(fn(*draws), dtype=float)
    est = float(vals.mean())
    stderr = float(vals.std(ddof=1) / np.sqrt(samples))
    return est, stderr


def fit_coefficients(pdf, order: int, points: int = DEFAULT_GRID) -> BasisCoefficients:
    """Least-squares basis-coefficient fit to a pdf given on [0, 1].

    ``pdf`` may be a callable or a (x, values) pair.  The fit is repeated on
    a refined grid; if the two solutions disagree the projection has not
    converged (wrong order, non-polynomial density) and an error is raised
    rather than a misleading coefficient vector.
    """

    def solve(x, vals):
        sol, *_ = np.linalg.lstsq(_basis_matrix(order, x), vals, rcond=None)
        return sol

    if isinstance(pdf, tuple):
        x, vals = pdf
        return BasisCoefficients(solve(np.asarray(x, float), np.asarray(vals, float)))

    x = _grid(points)
    c1 = solve(x, _pdf_values(pdf, x))
    x2 = _grid(2 * points - 1)
    c2 = solve(x2, _pdf_values(pdf, x2))
    if np.abs(c1 - c2).sum() > 1e-7 * max(1.0, np.abs(c1).sum()):
        raise NonConvergenceError("coefficient fit did not stabilize under refinement")
    return BasisCoefficients(c2)


def tensor_expect(fn: Callable, dists: Sequence[BasisCoefficients], nodes: int = 48) -> float:
    """E[fn(a_1, ..., a_k)] by tensor-product Gauss-Legendre quadrature.

    Exact (to round-off) whenever fn times the pdfs is polynomial of degree
    below 2*nodes in each variable, which covers every inference integrand.
    """
    xs, ws = np.polynomial.legendre.leggauss(nodes)
    xs = 0.5 * (xs + 1.0)
    ws = 0.5 * ws
    grids = np.meshgrid(*[xs] * len(dists), indexing="ij")
    weight = np.ones_like(grids[0])
    for axis, d in enumerate(dists):
        shape = [1] * len(dists)
        shape[axis] = nodes
        weight = weight * (ws * basis.pdf_at(d, xs)).reshape(shape)
    return float(np.sum(fn(*grids) * weight))


def infer_reference(fn: Callable, dists: Sequence[BasisCoefficients], n_i: int,
                    nodes: int = 48) -> BasisCoefficients:
    """Reference inferred distribution of x = fn(a_1, ..., a_k) at order n_i.

    Coefficient i of the inferred distribution equals E[g(i, n_i, x)] divided
    by n_i + 1, so each one is a single polynomial expectation that the
    tensor-product rule evaluates exactly; no ill-conditioned inversion is
    involved.
    """
    raw = np.array([
        tensor_expect(lambda *a, i=i: basis.basis_pdf(i, n_i, fn(*a)), dists, nodes)
        for i in range(n_i + 1)
    ]) / (n_i + 1)
    return basis.normalize(raw)


def coefficients_from_moments(moments: Sequence[float]) -> BasisCoefficients:
    """Invert the moment relations to recover coefficients of order len-1.

    Solves V c = mu where V[m, i] = E[a^m] under basis pdf i; an independent
    route to the same vector the inference formula produces directly.  Row
    scaling by C(n+1+m, m) turns V into the symmetric Pascal matrix
    C(i+m, m), whose inverse factors exactly through integer Pascal
    triangles; that sidesteps the unstable float factorization a generic
    solve would need.  Conditioning still amplifies the round-off already
    present in the input moments by roughly 16**order, so the round trip is
    only meaningful up to moderate orders.
    """
    mu = np.asarray(moments, dtype=float)
    n = mu.size - 1
    scale = np.array([math.comb(n + 1 + m, m) for m in range(n + 1)], dtype=float)
    b = mu * scale
    linv = np.zeros((n + 1, n + 1))
    for i in range(n + 1):
        for j in range(i + 1):
            linv[i, j] = (-1) ** (i - j) * math.comb(i, j)
    return BasisCoefficients(linv.T @ (linv @ b))


def basis_normalization_residual(max_order: int = 30, points: int = DEFAULT_GRID) -> float:
    """Max |1 - integral of a basis pdf| over all orders up to max_order."""
    x = _grid(points)
    worst = 0.0
    for n in range(max_order + 1):
        totals = simpson(_basis_matrix(n, x), x=x, axis=0)
        worst = max(worst, float(np.max(np.abs(totals - 1.0))))
    return worst
