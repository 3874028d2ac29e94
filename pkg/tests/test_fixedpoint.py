import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from sgwave.errors import DegenerateIterate, GridMismatch, MaxIterExceeded, NotContractive
from sgwave.phaseflow import loop_integral
from sgwave.shooting import solve_hat_mu
from sgwave.soliton_fixedpoint import (
    BOX_GAMMA_MAX,
    CONTRACTION_GAMMA_MAX,
    WeightedGridFunction,
    apply_operator,
    classical_operator,
    contraction_constants,
    first_approximation,
    first_velocity,
    iterate_to_fixed_point,
    mu_error_bound,
    start_function,
    tricomi_condition,
    tuned_mu,
    weighted_distance,
)
from sgwave.washboard import potential

TWO_PI = 2 * math.pi


def z1_closed_form(y, gamma):
    c = math.sqrt(1 - gamma**2)
    return c * 2 * np.sin(y / 2) ** 2 + gamma * (math.pi * (np.cos(y / 2) - 1) + y - np.sin(y))


def test_operator_fixes_start_without_drive():
    z0 = start_function()
    z, mu = apply_operator(z0, 0.0)
    assert mu == 0.0
    np.testing.assert_allclose(z.values, z0.values, atol=1e-15)


def test_operator_first_step():
    z0 = start_function()
    z, mu = apply_operator(z0, 0.1)
    assert mu == pytest.approx(math.pi * 0.1 / 4, rel=1e-13)
    i = z0.n // 2
    assert z.values[i] == pytest.approx(2 * math.sqrt(0.99), abs=1e-12)
    np.testing.assert_allclose(z.values, z1_closed_form(z.y_grid, 0.1), atol=1e-13)
    assert z.values[0] == 0.0


def test_degenerate_iterate():
    y = np.linspace(0, TWO_PI, 9)
    with pytest.raises(DegenerateIterate):
        apply_operator(WeightedGridFunction(y, np.zeros(9)), 0.1)
    with pytest.raises(DegenerateIterate):
        tuned_mu(WeightedGridFunction(y, np.zeros(9)), 0.1)


def test_weighted_distance():
    z0 = start_function()
    zero = WeightedGridFunction(z0.y_grid, np.zeros_like(z0.values))
    assert weighted_distance(z0, zero) == pytest.approx(4.0, abs=1e-12)
    assert weighted_distance(z0, z0) == 0.0
    with pytest.raises(GridMismatch):
        weighted_distance(z0, start_function(64))


def test_weighted_distance_first_step_against_dense_grid():
    z0 = start_function()
    z1, _ = apply_operator(z0, 0.1)
    # independent dense evaluation of 2 (z1 - z0) / sin^2(y/2) at 40 digits
    mpmath = pytest.importorskip("mpmath")
    mpmath.mp.dps = 40
    g = mpmath.mpf("0.1")
    c = mpmath.sqrt(1 - g * g)
    pi = mpmath.pi

    def ratio(y):
        s2 = mpmath.sin(y / 2) ** 2
        z1 = 2 * c * s2 + g * (pi * (mpmath.cos(y / 2) - 1) + y - mpmath.sin(y))
        return abs(2 * (z1 - 2 * s2) / s2)

    nodes = [mpmath.mpf(10) ** -k for k in range(3, 9)]
    nodes += [2 * pi * mpmath.mpf(k) / 4000 for k in range(1, 4000)]
    nodes += [2 * pi - e for e in nodes[:6]]
    dense = float(max(ratio(y) for y in nodes))
    assert weighted_distance(z1, z0) == pytest.approx(dense, abs=1e-8)


def test_contraction_constants_values():
    c = contraction_constants(0.0)
    assert (c.a, c.b, c.lam) == (2.0, 2.0, 0.0)
    c = contraction_constants(0.1)
    assert c.a == pytest.approx(1.65024625, abs=1e-8)
    assert c.b == pytest.approx(2.28835898, abs=1e-8)
    assert c.lam == pytest.approx(0.27532526, abs=1e-8)
    assert c.box_valid and c.contraction_valid


def test_contraction_constants_thresholds():
    assert BOX_GAMMA_MAX == pytest.approx(0.1876, abs=1e-4)
    assert CONTRACTION_GAMMA_MAX == pytest.approx(0.179, abs=1e-3)
    lo = contraction_constants(BOX_GAMMA_MAX * (1 - 1e-9))
    hi = contraction_constants(BOX_GAMMA_MAX * (1 + 1e-9))
    assert lo.box_valid and not hi.box_valid
    assert lo.a / lo.b == pytest.approx(0.5, abs=1e-8)
    c = contraction_constants(CONTRACTION_GAMMA_MAX)
    # the closed-form threshold is conservative: lambda < 1 there, = 1 slightly above
    assert c.lam < 1.0 and c.contraction_valid
    root = brentq(lambda g: contraction_constants(g).lam - 1.0, 0.17, BOX_GAMMA_MAX * 0.999)
    assert CONTRACTION_GAMMA_MAX < root < BOX_GAMMA_MAX
    assert contraction_constants(0.17).contraction_valid
    assert contraction_constants(0.18).contraction_valid
    assert not contraction_constants(0.181).contraction_valid
    assert math.isnan(contraction_constants(0.4).a)


def test_iteration_without_drive():
    run = iterate_to_fixed_point(0.0)
    assert run.iterations == 1
    assert run.mu_hat == 0.0
    np.testing.assert_allclose(run.z_hat.values, start_function().values, atol=1e-15)


def test_iteration_matches_shooting():
    run = iterate_to_fixed_point(0.1)
    shoot = solve_hat_mu(0.1)
    assert run.converged
    assert abs(run.mu_hat - shoot.mu_star) <= 1e-8
    assert np.all(run.ratios <= run.lam + 1e-6)
    # energy balance of the fixed point against the shooting curve's loop integral
    I = loop_integral(shoot.curve, shoot.g_launch)
    assert run.mu_hat * I == pytest.approx(TWO_PI * 0.1, abs=1e-8)


def test_iteration_refuses_outside_range():
    with pytest.raises(NotContractive) as exc:
        iterate_to_fixed_point(0.2)
    assert exc.value.exit_code == 3


def test_forced_iteration_beyond_proven_range():
    run = iterate_to_fixed_point(0.25, force=True)
    assert run.forced and run.converged
    assert run.apriori_error_mu == math.inf
    assert abs(run.mu_hat - solve_hat_mu(0.25).mu_star) <= 1e-7


def test_iteration_budget():
    with pytest.raises(MaxIterExceeded):
        iterate_to_fixed_point(0.1, max_iter=2)


@pytest.mark.parametrize("gamma", [0.05, 0.1, 0.15])
def test_apriori_bounds_hold(gamma):
    run = iterate_to_fixed_point(gamma)
    d01 = run.steps[0]
    for m, mu in enumerate(run.mu_sequence[:-1]):
        bound = mu_error_bound(gamma, run.lam, m + 1, d01)
        assert abs(mu - run.mu_hat) <= bound + 1e-14
    assert run.apriori_error_mu >= abs(run.mu_sequence[-2] - run.mu_hat)
    for k, z in enumerate(run.iterates[1:], start=1):
        assert weighted_distance(z, run.z_hat) <= run.lam**k / (1 - run.lam) * d01 + 1e-12


def test_iterates_keep_quadratic_ends():
    run = iterate_to_fixed_point(0.15)
    for z in run.iterates:
        r = z.ratio()
        for i in (1, 2, -2, -3):
            assert run.a**2 - 1e-9 <= r[i] <= run.b**2 + 1e-9


def test_grid_refinement_is_fourth_order():
    mus = [iterate_to_fixed_point(0.1, n=n).mu_hat for n in (64, 128, 256)]
    d1, d2 = abs(mus[1] - mus[0]), abs(mus[2] - mus[1])
    assert d1 / d2 >= 12


def test_first_approximation():
    fa = first_approximation(0.0)
    y = np.linspace(0, TWO_PI, 50)
    assert fa.mu1 == 0.0
    np.testing.assert_allclose(fa.z1(y), 2 * np.sin(y / 2) ** 2, atol=1e-15)
    fa = first_approximation(0.1, 1.0)
    assert fa.v1 == pytest.approx(0.07830, abs=5e-6)
    assert fa.v1 == pytest.approx(1 / math.sqrt(1 + (40 / math.pi) ** 2), rel=1e-15)
    assert first_velocity(0.0, 3.0) == 0.0
    # the first iterate and its energy are consistent with the potential
    g0 = -math.asin(0.1) - math.pi
    np.testing.assert_allclose(fa.z1(y) + potential(g0 + y, 0.1), fa.e1(y), atol=1e-14)
    assert fa.e1(0.0) == pytest.approx(potential(g0, 0.1), abs=1e-15)


def test_tricomi_condition():
    y = np.linspace(0, TWO_PI, 513)
    z0 = WeightedGridFunction(y, np.full_like(y, 10.0))
    z1 = classical_operator(z0, 0.1, 0.01)
    ok, eps1, eta1 = tricomi_condition(z0, z1, 0.01)
    assert ok and eta1 > eps1
    s = start_function(512)
    ok, _, eta1 = tricomi_condition(s, apply_operator(s, 0.1)[0], 0.01)
    assert not ok and eta1 == 0.0
    big = WeightedGridFunction(y, np.full_like(y, 1.0))
    ok, eps1, eta1 = tricomi_condition(big, WeightedGridFunction(y, np.full_like(y, 0.1)), 0.0)
    assert not ok and eta1 <= eps1


# random members of the box


def _box_member(gamma, coeffs, n=256):
    c = contraction_constants(gamma)
    lo, hi = c.a**2, c.b**2
    y = np.linspace(0, TWO_PI, n + 1)
    wave = sum(a * np.cos((k + 1) * y / 2 + b) for k, (a, b) in enumerate(coeffs))
    wave = 0.5 + 0.5 * np.tanh(wave)
    r = lo + (hi - lo) * wave
    return WeightedGridFunction(y, 0.5 * r * np.sin(y / 2) ** 2), c


coeff_lists = st.lists(st.tuples(st.floats(-3, 3), st.floats(0, TWO_PI)), min_size=1,
                       max_size=4)
gamma_in_range = st.floats(0.0, 0.179)


@settings(max_examples=200, deadline=None)
@given(gamma_in_range, coeff_lists)
def test_box_is_preserved(gamma, coeffs):
    z, c = _box_member(gamma, coeffs)
    az, mu = apply_operator(z, gamma)
    assert az.in_box(c.a, c.b, tol=1e-9)
    assert gamma * math.pi / (2 * c.b) - 1e-12 <= mu <= gamma * math.pi / (2 * c.a) + 1e-12


@settings(max_examples=100, deadline=None)
@given(gamma_in_range, coeff_lists, coeff_lists)
def test_operator_contracts(gamma, c1, c2):
    z1, c = _box_member(gamma, c1)
    z2, _ = _box_member(gamma, c2)
    d = weighted_distance(apply_operator(z1, gamma)[0], apply_operator(z2, gamma)[0])
    assert d <= c.lam * weighted_distance(z1, z2) + 1e-9
