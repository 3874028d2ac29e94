"""Travelling waves of phi_tt - phi_xx + sin phi + alpha phi_t + gamma = 0.

Constants, solitons, arrays and half-arrays of solitons are built from the
reduced first-order flow of the kinetic energy z(g) = g'^2/2, tuned by
shooting on the reduced dissipation mu, and checked independently against
the field equation.
"""
from .errors import SGWaveError
from .families import (
    Family,
    ParamChart,
    WaveSolution,
    build_array,
    build_constant,
    build_half_array,
    build_soliton,
    circle_wrap,
    energy_density,
    map_to_xt,
    mu_from_velocity,
    phi,
    velocity_from_mu,
)
from .phaseflow import KineticCurve, WaveProfile, integrate_z, loop_integral, quadrature_xi
from .shooting import hat_mu_bounds, solve_check_mu, solve_hat_mu, solve_periodic_zm
from .soliton_fixedpoint import first_approximation, iterate_to_fixed_point
from .washboard import SystemParams, classify_singular_point, critical_points, potential

__all__ = [
    "Family", "KineticCurve", "ParamChart", "SGWaveError", "SystemParams", "WaveProfile",
    "WaveSolution", "build_array", "build_constant", "build_half_array", "build_soliton",
    "circle_wrap", "classify_singular_point", "critical_points", "energy_density",
    "first_approximation", "hat_mu_bounds", "integrate_z", "iterate_to_fixed_point",
    "loop_integral", "map_to_xt", "mu_from_velocity", "phi", "potential", "quadrature_xi",
    "solve_check_mu", "solve_hat_mu", "solve_periodic_zm", "velocity_from_mu",
]
