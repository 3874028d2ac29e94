import math

import numpy as np
import pytest

from sgwave.errors import CFLViolation, DomainError, GridOutOfRange
from sgwave.families import build_array, build_constant, build_half_array, build_soliton
from sgwave.shooting import hat_mu_bounds, solve_hat_mu
from sgwave.verify import (
    asymptotic_check,
    bounds_sweep,
    check_energy_ordering,
    check_step_relation,
    check_velocity_ordering,
    pde_residual,
    property_suite,
    stability_probe,
)

TWO_PI = 2 * math.pi


@pytest.fixture(scope="module")
def soliton():
    return build_soliton(0.1, 1.0)


@pytest.fixture(scope="module")
def half():
    hat = solve_hat_mu(0.1).mu_star
    return build_half_array(0.1, 1.0, mu=0.5 * hat, hat_mu=hat)


# residuals

def test_constant_residual_exactly_zero():
    r = pde_residual(build_constant(0.3))
    assert r.max_residuals == [0.0, 0.0, 0.0]
    assert math.isnan(r.order)


def test_soliton_residual_order(soliton):
    r = pde_residual(soliton)
    assert all(1.9 <= o <= 2.1 for o in r.orders)
    fine = pde_residual(soliton, h=1e-3, levels=1)
    assert fine.max_residual <= 1e-5


@pytest.mark.parametrize("kwargs", [dict(mu=math.inf), dict(mu=2.0)])
def test_array_above_one_residual_order(kwargs):
    a = build_array(1.5, 1.0, **kwargs)
    r = pde_residual(a, x_range=(-20, 20))
    assert all(1.9 <= o <= 2.1 for o in r.orders)


def test_antiwave_residual_order():
    r = pde_residual(build_array(0.5, 1.0, -1, mu=0.2))
    assert all(1.9 <= o <= 2.1 for o in r.orders)
    r = pde_residual(build_soliton(0.3, 0.5, -1))
    assert all(1.9 <= o <= 2.1 for o in r.orders)


def test_half_array_residual_order(half):
    r = pde_residual(half, x_range=(-10, 100))
    assert all(1.9 <= o <= 2.1 for o in r.orders)


def test_residual_window_outside_profile(soliton):
    with pytest.raises(GridOutOfRange):
        pde_residual(soliton, x_range=(-1e4, 0.0))


# asymptotics

def test_soliton_asymptotics(soliton):
    rep = asymptotic_check(soliton)
    assert rep.passed
    by_name = {c.name: c for c in rep.checks}
    a = math.asin(0.1)
    assert by_name["phi limit at x -> -inf"].value == pytest.approx(-a, abs=1e-6)
    assert by_name["phi limit at x -> +inf"].value == pytest.approx(-a + TWO_PI, abs=1e-6)
    assert by_name["winding"].value == 1


def test_antisoliton_asymptotics():
    rep = asymptotic_check(build_soliton(0.1, 1.0, -1))
    assert rep.passed
    by_name = {c.name: c for c in rep.checks}
    a = math.asin(0.1)
    assert by_name["phi limit at x -> +inf"].value == pytest.approx(-a, abs=1e-6)
    assert by_name["phi limit at x -> -inf"].value == pytest.approx(-a + TWO_PI, abs=1e-6)
    assert by_name["winding"].value == -1


def test_half_array_asymptotics(half):
    rep = asymptotic_check(half)
    assert rep.passed
    by_name = {c.name: c for c in rep.checks}
    assert by_name["merge rate"].value > 0
    assert by_name["phi limit at x -> -inf"].value == pytest.approx(-math.asin(0.1), abs=1e-6)


def test_array_and_constant_asymptotics():
    assert asymptotic_check(build_array(0.5, 1.0, mu=0.2)).passed
    assert asymptotic_check(build_constant(0.5)).passed


# sweep

def test_bounds_sweep_flags_and_determinism():
    gammas = [0.3, 0.05, 0.6]
    rows = bounds_sweep(gammas)
    assert [r.gamma for r in rows] == sorted(gammas)
    assert all(r.sandwich and r.monotone for r in rows)
    assert rows[0].hat_mu == pytest.approx(math.pi * 0.05 / 4, rel=0.05)
    for r in rows:
        assert (r.lower32, r.upper32) == hat_mu_bounds(r.gamma)
    again = bounds_sweep(gammas, jobs=2)
    assert again == rows


def test_bounds_sweep_rejects_grid():
    with pytest.raises(DomainError):
        bounds_sweep([0.0, 0.5])
    with pytest.raises(DomainError):
        bounds_sweep([0.5, 1.0])


# stability probe

def test_probe_unperturbed_array_on_circle():
    a = build_array(0.5, 1.0, mu=0.2)
    rep = stability_probe(a, 0.0, horizon=50.0, dx=0.05)
    assert rep.linf_distance < 5e-3
    assert rep.velocity_estimate == pytest.approx(a.v, rel=1e-3)
    assert abs(rep.energy_balance_defect) < 1e-2


def test_probe_perturbed_soliton(soliton):
    rep = stability_probe(soliton, 0.01, horizon=30.0, dx=0.05)
    assert rep.velocity_estimate == pytest.approx(soliton.v, rel=0.05)
    assert rep.linf_distance < 0.1


def test_probe_unstable_constant_departs():
    u = build_constant(0.3, unstable=True, alpha=0.2)
    rep = stability_probe(u, 1e-6, horizon=40.0, dx=0.1, half_width=20.0)
    assert rep.growth_rate > 0.3
    # linearisation about the top of the potential: s^2 + alpha s - cos(asin gamma) = 0
    s = 0.5 * (-0.2 + math.sqrt(0.04 + 4 * math.sqrt(1 - 0.09)))
    assert rep.growth_rate == pytest.approx(s, rel=0.15)
    stable = stability_probe(build_constant(0.3, alpha=0.2), 1e-3, horizon=20.0, dx=0.1,
                             half_width=20.0)
    assert stable.linf_distance <= 1e-3


def test_probe_cfl(soliton):
    with pytest.raises(CFLViolation):
        stability_probe(soliton, dx=0.05, dt=0.06, horizon=1.0)


# properties

def test_single_property_checks():
    assert check_energy_ordering(0.3, 0.4, 0.0, 0.5, 1.0) > 0
    assert check_velocity_ordering(0.0, 1.0, 0.3, 0.2, 0.2, 0.5) > 0
    worst, steps = check_step_relation(0.4, 0.3, 0.0, 3.0, -1)
    assert worst <= 1e-8
    assert np.all(steps > TWO_PI * 0.4) and np.all(np.diff(steps) > 0)


def test_property_suite_small():
    out = property_suite(n=15, seed=3)
    assert [o.trials for o in out] == [15, 15, 15]
    assert all(o.passed for o in out)
    assert property_suite(n=3, seed=3)[0].worst == property_suite(n=3, seed=3)[0].worst
