"""Tests for the smoothing transform and the decay schedule."""

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import simpson

from skilltracer import basis, oracle
from skilltracer.basis import BasisCoefficients
from skilltracer.smoothing import (
    SECONDS_PER_MONTH,
    SECONDS_PER_YEAR,
    DecayParams,
    DecayPlan,
    apply_decay,
    decay_ratio,
    decompose,
    smooth,
)

FLAT = BasisCoefficients.flat()
DEFAULTS = DecayParams()


def random_coeffs(rng, max_order=12):
    n = rng.integers(0, max_order + 1)
    return basis.normalize(rng.random(n + 1) + 1e-3)


# ------------------------------------------------------------- smoothing


def test_smooth_flat_stays_flat():
    for n_s in (1, 2, 8, 40):
        out = smooth(FLAT, n_s)
        assert out.order == n_s
        assert_allclose(out.coeffs, np.full(n_s + 1, 1.0 / (n_s + 1)), atol=1e-14)


def test_smooth_hand_case():
    out = smooth(BasisCoefficients(np.array([0.0, 1.0])), 1)
    assert_allclose(out.coeffs, [1 / 3, 2 / 3], atol=1e-15)
    assert_allclose(basis.mean(out), 5 / 9, atol=1e-15)


def test_smooth_to_order_zero_is_flat():
    rng = np.random.default_rng(103)
    for _ in range(5):
        assert_allclose(smooth(random_coeffs(rng), 0).coeffs, [1.0])


def test_smooth_spike_to_order_one_is_a_line():
    coeffs = np.zeros(49)
    coeffs[29] = 1.0
    out = smooth(BasisCoefficients(coeffs), 1)
    assert out.order == 1
    x = np.linspace(0, 1, 11)
    pdf = basis.pdf_at(out, x)
    slopes = np.diff(pdf) / np.diff(x)
    assert_allclose(slopes, slopes[0], atol=1e-12)


def test_mean_decay_law_exact():
    rng = np.random.default_rng(107)
    for _ in range(200):
        c = random_coeffs(rng, max_order=150)
        n_s = int(rng.integers(1, 21))
        out = smooth(c, n_s)
        want = 0.5 + (basis.mean(c) - 0.5) * n_s / (n_s + 2.0)
        assert abs(basis.mean(out) - want) < 1e-9


def test_smooth_matches_quadrature_oracle():
    rng = np.random.default_rng(109)
    for _ in range(25):
        c = random_coeffs(rng)
        n_s = int(rng.integers(1, 17))
        got = smooth(c, n_s)
        grid = oracle.quad_smooth(c, n_s)
        ref = oracle.fit_coefficients(grid, n_s)
        assert np.abs(got.coeffs - ref.coeffs).sum() < 1e-6


def test_smooth_variance_consistent_with_joint_prior():
    # Quadrature variance of the output may not dip below the input
    # variance shrunk by the squared correlation of the joint prior.
    rng = np.random.default_rng(113)
    x = np.linspace(0, 1, 4001)
    for _ in range(20):
        c = random_coeffs(rng)
        n_s = int(rng.integers(1, 17))
        out = smooth(c, n_s)
        pdf = basis.pdf_at(out, x)
        mean_out = simpson(pdf * x, x=x)
        var_out = simpson(pdf * (x - mean_out) ** 2, x=x)
        var_in = basis.moment(c, 2) - basis.mean(c) ** 2
        rho = n_s / (n_s + 2.0)
        assert var_out >= rho**2 * var_in - 1e-9


def test_joint_prior_correlation_matches_order():
    # Sample the joint prior (common mixture component, independent beta
    # draws) and check the advertised correlation n_s / (n_s + 2).
    rng = np.random.default_rng(127)
    for n_s in (1, 4, 10):
        k = rng.integers(0, n_s + 1, size=400_000)
        a = rng.beta(k + 1.0, n_s - k + 1.0)
        b = rng.beta(k + 1.0, n_s - k + 1.0)
        got = np.corrcoef(a, b)[0, 1]
        assert abs(got - n_s / (n_s + 2.0)) < 5e-3


# ---------------------------------------------------------- decay ratios


def test_decay_ratio_fresh_student():
    assert_allclose(decay_ratio(0.0, 0, DEFAULTS), 0.5 ** (1 / 6), rtol=1e-12)
    assert round(decay_ratio(0.0, 0, DEFAULTS), 4) == 0.8909


def test_decay_ratio_half_life():
    seasoned = decay_ratio(SECONDS_PER_YEAR, 10**9, DEFAULTS)
    assert_allclose(seasoned, 0.5, rtol=1e-9)


def test_decay_ratio_practice_hardens_memory():
    assert_allclose(decay_ratio(0.0, 8, DEFAULTS), 0.5 ** (1 / 12), rtol=1e-12)
    assert round(decay_ratio(0.0, 8, DEFAULTS), 4) == 0.9439
    r_values = [decay_ratio(SECONDS_PER_MONTH, n, DEFAULTS) for n in (0, 4, 8, 16)]
    assert all(a < b for a, b in zip(r_values, r_values[1:]))


def test_decay_ratio_rejects_negative_time():
    with pytest.raises(ValueError):
        decay_ratio(-1.0, 0, DEFAULTS)


# ---------------------------------------------------------- decomposition


def test_decompose_exact_single_orders():
    assert decompose(0.5, DEFAULTS).orders == (2,)
    assert decompose(0.9, DEFAULTS).orders == (18,)


def test_decompose_two_step_plan():
    plan = decompose(0.4, DEFAULTS)
    assert plan.orders == (8, 2)
    assert_allclose(plan.realized_ratio, 0.4, rtol=1e-12)


def test_decompose_near_one_is_empty_or_tiny():
    plan = decompose(1.0 - 1e-13, DEFAULTS)
    assert plan.orders == ()
    assert plan.realized_ratio == 1.0


def test_decompose_drops_residual_beyond_max_order():
    # Ratios too close to 1 would need an order above the cap; the residual
    # is dropped and the realized ratio stays above the target.
    plan = decompose(0.995, DEFAULTS)
    assert plan.orders == ()
    assert plan.realized_ratio >= plan.target_ratio


def test_decompose_properties():
    rng = np.random.default_rng(131)
    for _ in range(300):
        r = float(rng.uniform(0.3, 1.0 - 1e-9))
        plan = decompose(r, DEFAULTS)
        assert all(1 <= n <= DEFAULTS.n_s_max for n in plan.orders)
        assert tuple(sorted(plan.orders, reverse=True)) == plan.orders
        assert plan.realized_ratio >= r - 1e-12
        assert plan.realized_ratio / r <= 1.25 + 1e-12


# ---------------------------------------------------------- apply_decay


def test_apply_decay_single_order_equals_smooth():
    rng = np.random.default_rng(137)
    c = random_coeffs(rng)
    # One month idle at high practice count decomposes to a single order.
    t = SECONDS_PER_YEAR / 2
    r = decay_ratio(t, 10**9, DEFAULTS)
    plan = decompose(r, DEFAULTS)
    assert len(plan.orders) == 1
    got = apply_decay(c, t, 10**9, DEFAULTS)
    assert_allclose(got.coeffs, smooth(c, plan.orders[0]).coeffs, atol=1e-14)


def test_apply_decay_flat_fixed_point():
    got = apply_decay(FLAT, SECONDS_PER_MONTH, 3, DEFAULTS)
    assert_allclose(basis.pdf_at(got, np.linspace(0, 1, 9)), np.ones(9), atol=1e-12)


def test_apply_decay_mean_shrinks_by_realized_ratio():
    rng = np.random.default_rng(139)
    for _ in range(50):
        c = random_coeffs(rng, max_order=40)
        t = float(rng.uniform(0, 3 * SECONDS_PER_YEAR))
        count = int(rng.integers(0, 60))
        plan = decompose(decay_ratio(t, count, DEFAULTS), DEFAULTS)
        got = apply_decay(c, t, count, DEFAULTS)
        want = 0.5 + (basis.mean(c) - 0.5) * plan.realized_ratio
        assert abs(basis.mean(got) - want) < 1e-9
        if plan.orders:
            assert got.order == plan.orders[-1]


def test_decay_params_validation():
    with pytest.raises(ValueError):
        DecayParams(t_half=0.0)
    with pytest.raises(ValueError):
        DecayParams(n_half=0)
    again = DecayParams.from_dict(DEFAULTS.to_dict())
    assert again == DEFAULTS
