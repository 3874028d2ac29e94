"""Travelling-wave solutions of

    phi_tt - phi_xx + sin phi + alpha phi_t + gamma = 0

in physical coordinates. A profile g(xi) of the reduced problem is mapped by

    phi(x, t) = g(h xi) - pi,     xi = (x - x0 - v t) / sqrt(1 - v^2),

with helicity h = +-1 and v = h mu / sqrt(alpha^2 + mu^2). The unit-speed
branch (gamma > 1, mu = inf) uses xi = h (x - x0) - t instead.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import brentq

from .errors import (
    AlphaZeroInverse,
    DomainError,
    GammaOutOfRange,
    MuInfinityRequiresGammaAboveOne,
    NotAnArray,
    ParamOutOfRange,
)
from .phaseflow import TWO_PI, WaveProfile, periodic_profile, quadrature_xi
from .shooting import (
    ShootResult,
    half_array_curve,
    solve_check_mu,
    solve_hat_mu,
    solve_periodic_zm,
    unit_velocity_profile,
)
from .washboard import SystemParams, is_gamma_one


class Family(str, Enum):
    CONSTANT = "constant"
    SOLITON = "soliton"
    ANTISOLITON = "antisoliton"
    ARRAY = "array"
    ANTIARRAY = "antiarray"
    HALF_ARRAY = "half_array"
    ANTI_HALF_ARRAY = "anti_half_array"


_PAIRS = {
    "soliton": (Family.SOLITON, Family.ANTISOLITON),
    "array": (Family.ARRAY, Family.ANTIARRAY),
    "half_array": (Family.HALF_ARRAY, Family.ANTI_HALF_ARRAY),
}


def _family(kind: str, helicity: int) -> Family:
    return _PAIRS[kind][0 if helicity > 0 else 1]


def _check_helicity(helicity: int):
    if helicity not in (1, -1):
        raise DomainError(f"helicity must be +1 or -1, got {helicity}")


def _check_alpha(alpha: float):
    if not alpha > 0:
        raise DomainError(f"alpha must be > 0, got {alpha}")


# ---------------------------------------------------------------------------
# velocity map


def velocity_from_mu(mu: float, alpha: float) -> float:
    """Speed mu / sqrt(alpha^2 + mu^2); 1 for mu = inf."""
    if mu < 0:
        raise ParamOutOfRange(f"mu must be >= 0, got {mu}")
    if math.isinf(mu):
        return 1.0
    if mu == 0:
        return 0.0
    return mu / math.hypot(alpha, mu)


def mu_from_velocity(v: float, alpha: float) -> float:
    """Reduced dissipation alpha / sqrt(v^-2 - 1) for |v| < 1."""
    if alpha == 0:
        raise AlphaZeroInverse("mu is undetermined for alpha = 0")
    av = abs(v)
    if av >= 1:
        raise ParamOutOfRange(f"|v| must be < 1, got {v}")
    if av == 0:
        return 0.0
    return alpha * av / math.sqrt((1.0 - av) * (1.0 + av))


# ---------------------------------------------------------------------------
# solution object


@dataclass(frozen=True, eq=False)
class WaveSolution:
    """A classified travelling wave.

    ``profile`` is absent for constants, ``Xi`` and ``X`` are the
    'time' and spatial periods of (the asymptotic) array, and ``winding``
    the number of 2 pi steps per soliton or per array period.
    """

    family: Family
    params: SystemParams
    helicity: int
    winding: int
    profile: WaveProfile | None = None
    Xi: float | None = None
    X: float | None = None
    phase_x0: float = 0.0
    constant_value: float | None = None
    unstable: bool = False
    balance_residual: float | None = None
    periodicity_residual: float | None = None
    loop_integral: float | None = None
    z_M: float | None = None
    extras: dict = field(default_factory=dict)

    @property
    def gamma(self) -> float:
        return self.params.gamma

    @property
    def alpha(self) -> float:
        return self.params.alpha if self.params.alpha is not None else 0.0

    @property
    def mu(self) -> float:
        return self.params.mu

    @property
    def v(self) -> float:
        return self.params.v if self.params.v is not None else 0.0

    @property
    def is_array(self) -> bool:
        return self.family in (Family.ARRAY, Family.ANTIARRAY)

    @property
    def unit_speed(self) -> bool:
        return abs(self.v) == 1.0

    def xi_of(self, x, t):
        """Profile argument h xi (or h (x - x0) - t on the unit-speed branch)."""
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        h = self.helicity
        if self.unit_speed:
            return h * (x - self.phase_x0) - t
        s = math.sqrt(1.0 - self.v * self.v)
        return h * (x - self.phase_x0 - self.v * t) / s

    def with_shift(self, x0: float) -> "WaveSolution":
        return dataclasses.replace(self, phase_x0=x0)


def map_to_xt(solution: WaveSolution, x, t):
    """(phi, phi_x, phi_t) at the broadcast points (x, t)."""
    x, t = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
    if solution.profile is None:
        phi = np.full(x.shape, solution.constant_value, dtype=float)
        zero = np.zeros(x.shape)
        return phi, zero, zero.copy()
    arg = solution.xi_of(x, t)
    g = solution.profile.evaluate(arg.ravel()).reshape(arg.shape)
    gp = solution.profile.evaluate(arg.ravel(), 1).reshape(arg.shape)
    h = solution.helicity
    if solution.unit_speed:
        return g - math.pi, h * gp, -gp
    s = math.sqrt(1.0 - solution.v ** 2)
    return g - math.pi, h * gp / s, -h * solution.v * gp / s


def phi(solution: WaveSolution, x, t):
    return map_to_xt(solution, x, t)[0]


def energy_density(solution: WaveSolution, x, t):
    """h = phi_t^2/2 + phi_x^2/2 + gamma phi - cos phi."""
    f, fx, ft = map_to_xt(solution, x, t)
    return 0.5 * ft * ft + 0.5 * fx * fx + solution.gamma * f - np.cos(f)


# ---------------------------------------------------------------------------
# builders


def build_constant(gamma: float, *, unstable: bool = False,
                   alpha: float | None = None) -> WaveSolution:
    """Uniform state phi = -asin(gamma), or asin(gamma) - pi with ``unstable``.

    ``alpha`` is only recorded (the state does not depend on it).
    """
    if gamma >= 1 or is_gamma_one(gamma):
        raise GammaOutOfRange(
            f"uniform solutions need gamma < 1 (at gamma = 1 only an unstable one exists), "
            f"got {gamma}")
    p = SystemParams(gamma=gamma, mu=0.0, alpha=alpha, v=0.0 if alpha is not None else None)
    value = math.asin(gamma) - math.pi if unstable else -math.asin(gamma)
    return WaveSolution(family=Family.CONSTANT, params=p, helicity=1, winding=0,
                        constant_value=value, unstable=unstable)


def _params(gamma, mu, alpha, helicity) -> SystemParams:
    v = helicity * velocity_from_mu(mu, alpha)
    if 0 < abs(v) < 1:
        # use the exact inverse so the stored triple is self-consistent
        mu = mu_from_velocity(v, alpha)
    return SystemParams(gamma=gamma, mu=mu, epsilon=1, alpha=alpha, v=v)


def build_soliton(gamma: float, alpha: float, helicity: int = 1, *,
                  mu_tol: float = 1e-12, x0: float = 0.0,
                  shoot: ShootResult | None = None) -> WaveSolution:
    """Soliton (helicity +1) or antisoliton (-1) joining neighbouring uniform states.

    The profile is anchored so that g(0) = g_0^M + pi.
    """
    _check_helicity(helicity)
    _check_alpha(alpha)
    if shoot is None:
        shoot = solve_hat_mu(gamma, mu_tol)
    g0 = shoot.g_launch
    profile = quadrature_xi(shoot.curve, g0 + math.pi, 0.0)
    p = _params(gamma, shoot.mu_star, alpha, helicity)
    return WaveSolution(
        family=_family("soliton", helicity), params=p, helicity=helicity,
        winding=helicity, profile=profile, phase_x0=x0,
        balance_residual=shoot.balance_residual, loop_integral=shoot.loop_integral,
        extras={"g_launch": g0},
    )


ARRAY_PARAMS = ("z_M", "mu", "Xi", "abs_v", "I")


class ParamChart:
    """Conversions among the array parameters z_M, I, mu, Xi and |v| at fixed gamma, alpha.

    Every conversion goes through the periodic orbit with the given mu.
    """

    def __init__(self, gamma: float, alpha: float = 1.0, *, hat_mu: float | None = None):
        if gamma <= 0:
            raise GammaOutOfRange("arrays need gamma > 0")
        self.gamma = gamma
        self.alpha = alpha
        self._hat_mu = hat_mu

    @property
    def mu_max(self) -> float:
        """Upper end of the admissible mu range (mu_hat for gamma < 1, inf above)."""
        if self.gamma > 1 and not is_gamma_one(self.gamma):
            return math.inf
        if is_gamma_one(self.gamma):
            raise GammaOutOfRange("gamma = 1 arrays are not constructed")
        if self._hat_mu is None:
            self._hat_mu = solve_hat_mu(self.gamma).mu_star
        return self._hat_mu

    def orbit_from_mu(self, mu: float) -> ShootResult:
        if not 0 < mu < self.mu_max:
            raise ParamOutOfRange(f"mu must lie in (0, {self.mu_max}), got {mu}")
        return solve_periodic_zm(self.gamma, mu)

    def xi_period(self, orbit: ShootResult) -> float:
        return periodic_profile(orbit.curve, orbit.g_launch).period

    def mu_from(self, kind: str, value: float) -> float:
        if kind == "mu":
            return value
        if kind == "I":
            if not value > 0:
                raise ParamOutOfRange(f"I must be > 0, got {value}")
            return TWO_PI * self.gamma / value
        if kind == "abs_v":
            if not 0 < value < 1:
                raise ParamOutOfRange(f"|v| must lie in (0, 1), got {value}")
            _check_alpha(self.alpha)
            return mu_from_velocity(value, self.alpha)
        if kind == "z_M":
            return solve_check_mu(self.gamma, value).mu_star
        if kind == "Xi":
            return self._mu_from_xi(value)
        raise ParamOutOfRange(f"unknown array parameter {kind!r}")

    def orbit(self, kind: str, value: float) -> ShootResult:
        if kind == "z_M":
            if not value > 0:
                raise ParamOutOfRange(f"z_M must be > 0, got {value}")
            return solve_check_mu(self.gamma, value)
        return self.orbit_from_mu(self.mu_from(kind, value))

    def describe(self, orbit: ShootResult) -> dict:
        """All five parameters of the orbit."""
        return {
            "z_M": orbit.z_M, "mu": orbit.mu_star, "I": orbit.loop_integral,
            "Xi": self.xi_period(orbit), "abs_v": velocity_from_mu(orbit.mu_star, self.alpha),
        }

    def _mu_from_xi(self, target: float) -> float:
        # Xi increases from 0 (mu -> 0) to infinity (mu -> mu_max)
        if not target > 0:
            raise ParamOutOfRange(f"Xi must be > 0, got {target}")
        top = self.mu_max

        def f(logmu):
            return math.log(self.xi_period(self.orbit_from_mu(math.exp(logmu))) / target)

        a = math.log(0.5 * top) if math.isfinite(top) else 0.0
        fa = f(a)
        b, fb = a, fa
        for _ in range(60):
            if (fa < 0) != (fb < 0):
                break
            if fa < 0:
                # need more mu
                a, fa = b, fb
                b = (math.log(0.5 * (math.exp(b) + top)) if math.isfinite(top)
                     else b + math.log(4.0))
            else:
                a, fa = b, fb
                b = b - math.log(4.0)
            fb = f(b)
        else:
            raise ParamOutOfRange(f"Xi={target} not reachable")
        lo, hi = sorted((a, b))
        return math.exp(brentq(f, lo, hi, xtol=1e-13, rtol=1e-14))


def build_array(gamma: float, alpha: float, helicity: int = 1, *, z_M: float | None = None,
                mu: float | None = None, Xi: float | None = None, abs_v: float | None = None,
                I: float | None = None, x0: float = 0.0,
                chart: ParamChart | None = None) -> WaveSolution:
    """Array (helicity +1) or antiarray (-1) fixed by exactly one parameter.

    ``mu = inf`` (or ``abs_v = 1``) selects the unit-speed branch, which
    exists for gamma > 1 only. The profile is anchored at g(0) = g0 + pi
    with g0 the launch point of the periodic shoot.
    """
    _check_helicity(helicity)
    _check_alpha(alpha)
    given = {k: v for k, v in zip(ARRAY_PARAMS, (z_M, mu, Xi, abs_v, I)) if v is not None}
    if len(given) != 1:
        raise ParamOutOfRange(f"give exactly one of {ARRAY_PARAMS}, got {sorted(given)}")
    (kind, value), = given.items()
    above_one = gamma > 1 and not is_gamma_one(gamma)
    if (kind == "mu" and math.isinf(value)) or (kind == "abs_v" and value == 1):
        if not above_one:
            raise MuInfinityRequiresGammaAboveOne(
                f"the unit-speed branch needs gamma > 1, got {gamma}")
        profile, xi_period = unit_velocity_profile(gamma, alpha)
        v = float(helicity)
        p = SystemParams(gamma=gamma, mu=math.inf, epsilon=1, alpha=alpha, v=v)
        return WaveSolution(
            family=_family("array", helicity), params=p, helicity=helicity,
            winding=helicity, profile=profile, Xi=xi_period, X=xi_period, phase_x0=x0,
            balance_residual=0.0, periodicity_residual=0.0,
        )
    if chart is None:
        chart = ParamChart(gamma, alpha)
    orbit = chart.orbit(kind, value)
    profile = periodic_profile(orbit.curve, orbit.g_launch)
    p = _params(gamma, orbit.mu_star, alpha, helicity)
    xi_period = profile.period
    return WaveSolution(
        family=_family("array", helicity), params=p, helicity=helicity, winding=helicity,
        profile=profile, Xi=xi_period, X=xi_period * math.sqrt(1.0 - p.v ** 2),
        phase_x0=x0, balance_residual=orbit.balance_residual,
        periodicity_residual=orbit.periodicity_residual, loop_integral=orbit.loop_integral,
        z_M=orbit.z_M, extras={"g_launch": orbit.g_launch},
    )


def build_half_array(gamma: float, alpha: float, helicity: int = 1, mu: float | None = None,
                     *, span: int = 40, hat_mu: float | None = None,
                     x0: float = 0.0) -> WaveSolution:
    """Half-array: a separatrix from a uniform state merging into the array of the same mu.

    Beyond the integrated span the profile continues as the aligned
    periodic profile with a phase lead that decays at the measured
    per-period ratio, so the array is approached from above.
    """
    _check_helicity(helicity)
    _check_alpha(alpha)
    if mu is None:
        raise ParamOutOfRange("half-arrays need mu")
    half = half_array_curve(gamma, mu, span, hat_mu=hat_mu)
    array_profile = periodic_profile(half.zcheck, half.g0, half.g_ref, half.rho_offset)
    front = quadrature_xi(half.zbar, half.g_ref, 0.0)

    # past the span the profile lags the array by a phase that keeps
    # shrinking by tail_ratio per period
    xi_end = front.xi_hi
    q = half.tail_ratio
    lam = -math.log(q) / array_profile.period if q > 0 else 0.0
    lag = half.rho_tail

    def right_tail(xi, nu=0):
        s = lag * np.exp(-lam * (xi - xi_end))
        ds, d2s = -lam * s, lam * lam * s
        arg = xi + s
        if nu == 0:
            return array_profile.evaluate(arg)
        g1 = array_profile.evaluate(arg, 1)
        if nu == 1:
            return g1 * (1.0 + ds)
        return array_profile.evaluate(arg, 2) * (1.0 + ds) ** 2 + g1 * d2s

    profile = dataclasses.replace(front, right_tail=right_tail)
    p = _params(gamma, mu, alpha, helicity)
    xi_period = array_profile.period
    return WaveSolution(
        family=_family("half_array", helicity), params=p, helicity=helicity,
        winding=helicity, profile=profile, Xi=xi_period,
        X=xi_period * math.sqrt(1.0 - p.v ** 2), phase_x0=x0,
        balance_residual=half.check.balance_residual,
        periodicity_residual=half.check.periodicity_residual,
        loop_integral=half.check.loop_integral, z_M=half.check.z_M,
        extras={"half": half, "array_profile": array_profile, "g_launch": half.g0},
    )


# ---------------------------------------------------------------------------
# circle geometry


@dataclass(frozen=True, eq=False)
class CircleWrap:
    """An array placed on a circle of length L = m X (topological sector m)."""

    solution: WaveSolution
    m: int
    L: float

    @property
    def jump(self) -> float:
        """Increase of phi over one turn of the circle."""
        return TWO_PI * self.m * self.solution.winding

    def phi(self, x, t):
        """phi at x reduced to [x0, x0 + L), i.e. the field seen on the circle."""
        x = np.asarray(x, dtype=float)
        x0 = self.solution.phase_x0
        red = x0 + np.mod(x - x0, self.L)
        return phi(self.solution, red, t)

    def seam_mismatch(self, t: float = 0.0, eps: float = 1e-9) -> float:
        """|phi(x0 + L - eps) - phi(x0) - jump|, small when the wrap is consistent."""
        x0 = self.solution.phase_x0
        left = phi(self.solution, x0 + self.L - eps, t)
        right = phi(self.solution, x0, t)
        return float(abs(left - right - self.jump))


def circle_wrap(solution: WaveSolution, m: int = 1) -> CircleWrap:
    if not solution.is_array:
        raise NotAnArray(f"circle wrapping needs an array, got {solution.family.value}")
    if m < 1:
        raise ParamOutOfRange(f"m must be a positive integer, got {m}")
    return CircleWrap(solution=solution, m=m, L=m * solution.X)
