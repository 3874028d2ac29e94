import math

import numpy as np
import pytest
from scipy.integrate import quad

from sgwave.errors import (
    GammaNotAboveOne,
    GammaOutOfRange,
    MuNotBelowHatMu,
    SpanTooShort,
    ZMNonPositive,
)
from sgwave.shooting import (
    MU_TOL,
    array_leading_order,
    first_order_hat_mu,
    half_array_curve,
    hat_mu_bounds,
    shot_mismatch,
    solve_check_mu,
    solve_hat_mu,
    solve_periodic_zm,
    unit_velocity_profile,
)
from sgwave.washboard import SystemParams, launch_point

TWO_PI = 2 * math.pi


@pytest.fixture(scope="module")
def half():
    hat = solve_hat_mu(0.1).mu_star
    return half_array_curve(0.1, 0.5 * hat, hat_mu=hat)


def test_bounds_closed_form():
    lower, upper = hat_mu_bounds(0.5)
    c = math.sqrt(0.75)
    assert lower == pytest.approx(math.sqrt(math.sqrt(3 * c * c + 1) - 2 * c), rel=1e-15)
    assert upper == pytest.approx(math.sqrt(2 - 2 * c), rel=1e-15)
    assert upper == pytest.approx(0.5176380902, abs=1e-9)
    assert hat_mu_bounds(1.0) == pytest.approx((1.0, math.sqrt(2)), abs=1e-15)
    assert hat_mu_bounds(0.0) == (0.0, 0.0)
    with pytest.raises(GammaOutOfRange):
        hat_mu_bounds(1.5)


def test_hat_mu_half_gamma_inside_bounds():
    r = solve_hat_mu(0.5)
    lower, upper = hat_mu_bounds(0.5)
    assert lower <= r.mu_star <= upper
    assert r.bracket_width <= MU_TOL
    assert r.balance_residual <= 1e-8


def test_hat_mu_bracket_history_nested_and_signs():
    r = solve_hat_mu(0.3)
    widths = [hi - lo for lo, hi in r.bracket_history]
    assert all(b <= a for a, b in zip(widths, widths[1:]))
    lo, hi = r.bracket_history[-1]
    base = SystemParams(gamma=0.3, mu=0.0)
    from sgwave.shooting import separatrix_gap
    from sgwave.washboard import g_max
    g0 = g_max(0, 0.3)
    assert separatrix_gap(base.with_mu(lo - 1e-6), g0) > 0
    assert separatrix_gap(base.with_mu(hi + 1e-6), g0) < 0


def test_hat_mu_small_gamma_law():
    for g in (0.01, 0.02):
        mu = solve_hat_mu(g).mu_star
        assert mu / g == pytest.approx(math.pi / 4, rel=0.05)
    # the relative correction shrinks linearly with gamma
    d1 = abs(solve_hat_mu(0.01).mu_star / first_order_hat_mu(0.01) - 1)
    d2 = abs(solve_hat_mu(0.04).mu_star / first_order_hat_mu(0.04) - 1)
    assert d2 > 2 * d1


def test_hat_mu_curve_is_the_separatrix():
    r = solve_hat_mu(0.2)
    g = r.curve.g_grid
    assert r.curve.z_values.min() >= 0
    assert np.all(r.curve.z_values[1:-1] > 0)
    assert r.loop_integral * r.mu_star == pytest.approx(TWO_PI * 0.2, abs=1e-8)
    assert g[0] == pytest.approx(r.g_launch)


def test_hat_mu_rejects_gamma():
    for g in (0.0, 1.0, 1.2):
        with pytest.raises(GammaOutOfRange):
            solve_hat_mu(g)


def test_zero_mu_shot_gains_two_pi_gamma():
    g0 = launch_point(0.4, 0)
    F, _ = shot_mismatch(SystemParams(gamma=0.4, mu=0.0), g0, 0.3)
    assert F - 0.3 == pytest.approx(TWO_PI * 0.4, abs=1e-9)


def test_check_mu_periodicity_and_balance():
    r = solve_check_mu(1.5, 0.01)
    assert r.periodicity_residual <= 1e-8
    assert r.balance_residual <= 1e-8
    assert r.mu_star == pytest.approx(0.5 / math.sqrt(0.02), rel=0.15)


def test_check_mu_small_z_tends_to_hat_mu():
    hat = solve_hat_mu(0.5).mu_star
    assert solve_check_mu(0.5, 1e-6).mu_star == pytest.approx(hat, abs=1e-3)


def test_check_mu_rejects_nonpositive_z():
    with pytest.raises(ZMNonPositive):
        solve_check_mu(0.5, 0.0)


def test_check_mu_strictly_decreasing_in_z():
    for gamma in (0.3, 0.9, 2.0):
        mus = [solve_check_mu(gamma, z, mu_tol=1e-9).mu_star
               for z in np.geomspace(1e-3, 4.0, 5)]
        assert np.all(np.diff(mus) < 0), (gamma, mus)


def test_periodic_zm_inverts_check_mu():
    r = solve_check_mu(0.4, 0.2)
    back = solve_periodic_zm(0.4, r.mu_star)
    assert back.z_M == pytest.approx(0.2, rel=1e-8)


def test_half_array_w_negative_and_monotone(half):
    w = half.w_values[1:]
    assert np.all(w < 0)
    a = np.abs(w)
    assert np.all(np.diff(a) < 0)


def test_half_array_decay_rate_above_guarantee(half):
    assert half.decay_rate >= half.decay_bound > 0
    # the envelope bound holds pointwise
    g, w = half.w_g, np.abs(half.w_values)
    env = w[0] * np.exp(-half.decay_bound * (g - g[0]))
    assert np.all(w <= env * (1 + 1e-9) + 1e-13)


def test_half_array_tail_ratio(half):
    # per-period ratio of the phase integrand approaches exp(-rate 2 pi)
    assert 0 < half.tail_ratio < 1
    assert -math.log(half.tail_ratio) / TWO_PI == pytest.approx(half.decay_rate, rel=0.1)


def test_half_array_errors():
    hat = solve_hat_mu(0.1).mu_star
    with pytest.raises(MuNotBelowHatMu):
        half_array_curve(0.1, 1.01 * hat, hat_mu=hat)
    with pytest.raises(SpanTooShort):
        half_array_curve(0.1, 0.5 * hat, span=2, hat_mu=hat)
    with pytest.raises(GammaOutOfRange):
        half_array_curve(1.2, 0.5)


def test_half_array_near_hat_mu_reference_degenerates():
    hat = solve_hat_mu(0.3).mu_star
    zs = [half_array_curve(0.3, f * hat, span=6, hat_mu=hat).check.z_M
          for f in (0.9, 0.99, 0.999)]
    assert zs[0] > zs[1] > zs[2]
    assert zs[2] < 1e-2


@pytest.mark.parametrize("gamma", [math.sqrt(2), 2.0, 1.1, 3.7])
def test_unit_velocity_period_closed_form(gamma):
    for alpha in (1.0, 0.4):
        prof, Xi = unit_velocity_profile(gamma, alpha)
        closed = TWO_PI * alpha / math.sqrt(gamma * gamma - 1)
        assert Xi == pytest.approx(closed, rel=1e-10)
        numeric = alpha * quad(lambda s: 1 / (gamma - math.sin(s)), 0, TWO_PI,
                               epsabs=1e-13, epsrel=1e-13)[0]
        assert Xi == pytest.approx(numeric, rel=1e-10)


def test_unit_velocity_profile_linear_periodic_and_increasing():
    prof, Xi = unit_velocity_profile(1.5, 1.0)
    xi = np.linspace(-7, 7, 301)
    g = prof.evaluate(xi)
    assert np.max(np.abs(prof.evaluate(xi + Xi) - g - TWO_PI)) <= 1e-9
    assert np.all(np.diff(g) > 0)
    # satisfies alpha g' = gamma - sin g
    assert np.max(np.abs(prof.evaluate(xi, 1) - (1.5 - np.sin(g)))) <= 1e-8
    with pytest.raises(GammaNotAboveOne):
        unit_velocity_profile(0.9, 1.0)


def test_leading_order_values():
    p = array_leading_order(1.5, 1e-4)
    assert p.mu == pytest.approx(35.355339, abs=1e-6)
    assert p.v == pytest.approx(0.99960, abs=1e-5)
    big = array_leading_order(1.5, 1e6)
    assert big.mu < 1e-3 and big.v < 1e-3 and big.Xi < 1e-2
    with pytest.raises(GammaNotAboveOne):
        array_leading_order(0.5, 0.1)
    with pytest.raises(ZMNonPositive):
        array_leading_order(1.5, 0.0)


def test_leading_order_vs_shooting_small_z():
    z = 1e-6
    pred = array_leading_order(1.5, z)
    r = solve_check_mu(1.5, z)
    assert r.mu_star == pytest.approx(pred.mu, rel=0.05)
    assert r.loop_integral == pytest.approx(pred.I, rel=0.05)
