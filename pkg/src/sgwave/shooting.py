"""Shooting solvers on the kinetic-energy curve.

Heteroclinic connection
    The separatrix leaving the saddle g_k^M must land exactly on g_{k+1}^M;
    this fixes the reduced dissipation mu_hat(gamma).
Periodic orbit
    A curve with z(g0 + 2 pi) = z(g0) = z_M; fixing z_M fixes mu_check, and
    fixing mu fixes z_M.
Half-array
    A separatrix launched at mu < mu_hat, relaxing onto the periodic orbit of
    the same mu.

All shots use the continuous mismatch

    F = z(g_target)               if the target is reached,
    F = U(g_turn) - U(g_target)   if the particle turns back at g_turn,

which is continuous and monotone in mu. The potential difference is
evaluated from the turning distance d = g_target - g_turn as
gamma d - 2 sin(g_target - d/2) sin(d/2), which keeps its sign next to a
saddle where the naive difference of two nearly equal energies does not.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import (
    BracketFailure,
    DomainError,
    GammaNotAboveOne,
    GammaOutOfRange,
    MuNotBelowHatMu,
    ParamOutOfRange,
    SpanTooShort,
    ZMNonPositive,
)
from .phaseflow import (
    DEFAULT_ATOL,
    DEFAULT_RTOL,
    LAUNCH_DELTA,
    TWO_PI,
    Endpoint,
    KineticCurve,
    WaveProfile,
    _composite_integral,
    _cumulative_integral,
    integrate_z,
    join_curves,
    loop_integral,
)
from .washboard import SystemParams, g_max, is_gamma_one, launch_point, potential

MU_TOL = 1e-12
MAX_BISECT = 200


def hat_mu_bounds(gamma: float) -> tuple[float, float]:
    """Proven lower and upper bounds on mu_hat(gamma) for 0 <= gamma <= 1.

    lower = sqrt(sqrt(3 c^2 + 1) - 2 c), upper = sqrt(2 (1 - c)), c = sqrt(1 - gamma^2).
    """
    if not 0 <= gamma <= 1 + 1e-14:
        raise GammaOutOfRange(f"bounds need 0 <= gamma <= 1, got {gamma}")
    c = math.sqrt(max(0.0, 1.0 - gamma * gamma))
    lower = math.sqrt(max(0.0, math.sqrt(3.0 * c * c + 1.0) - 2.0 * c))
    upper = math.sqrt(2.0 * (1.0 - c))
    return lower, upper


def first_order_hat_mu(gamma: float) -> float:
    """Small-gamma law mu_hat ~ pi gamma / 4."""
    return math.pi * gamma / 4.0


@dataclass(frozen=True, eq=False)
class ShootResult:
    """Outcome of a bisection shoot.

    ``curve`` is the converged kinetic-energy curve, ``loop_integral`` the
    value of int sqrt(2 z) over one period starting at ``g_launch``.
    """

    mu_star: float
    bracket_history: list[tuple[float, float]]
    curve: KineticCurve
    balance_residual: float
    gamma: float
    g_launch: float
    loop_integral: float
    z_M: float = 0.0
    periodicity_residual: float | None = None
    extrapolated: bool = False

    @property
    def bracket_width(self) -> float:
        lo, hi = self.bracket_history[-1]
        return hi - lo


def shot_mismatch(params: SystemParams, g0: float, z0: float, span: float = TWO_PI,
                  rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL,
                  delta: float = LAUNCH_DELTA) -> tuple[float, KineticCurve]:
    """Integrate forward from (g0, z0) towards g0 + span and return (F, curve)."""
    curve = integrate_z(g0, z0, params, 1, span, snap=False, rtol=rtol, atol=atol,
                        delta=delta, dg_sample=0.05, dxi_sample=1.0)
    g_target = g0 + span
    if curve.endpoint_right is Endpoint.ZERO_CROSSING:
        d = g_target - curve.g_hi
        F = params.gamma * d - 2.0 * math.sin(g_target - 0.5 * d) * math.sin(0.5 * d)
        F = min(F, -1e-300)
    else:
        F = float(curve.z_values[-1])
    return F, curve


def _bisect(F, lo: float, hi: float, f_lo: float, f_hi: float, tol, history):
    """Shrink [lo, hi] with F(lo) > 0 > F(hi) until hi - lo <= tol(lo, hi).

    Brent's bracketing iteration drives the search; every evaluation tightens
    the recorded bracket (largest mu with F > 0, smallest with F <= 0), which
    is what ``history`` holds and what the width criterion applies to.
    """
    if not (f_lo > 0 > f_hi):
        raise BracketFailure(f"no sign change on [{lo}, {hi}]: F = {f_lo}, {f_hi}")
    box = [lo, hi]
    history.append((lo, hi))

    def tracked(x):
        fx = F(x)
        if fx > 0:
            box[0] = max(box[0], x)
        else:
            box[1] = min(box[1], x)
        if box[0] > box[1]:
            raise BracketFailure(f"criterion not monotone near mu={x}")
        history.append((box[0], box[1]))
        return fx

    target = tol(lo, hi)
    brentq(tracked, lo, hi, xtol=0.5 * target, rtol=4 * np.finfo(float).eps,
           maxiter=MAX_BISECT)
    # Brent stops on its own bracket estimate; finish with plain halving if needed
    while box[1] - box[0] > tol(*box):
        tracked(0.5 * (box[0] + box[1]))
    return 0.5 * (box[0] + box[1])


def separatrix_gap(params: SystemParams, g0: float, rtol: float = DEFAULT_RTOL,
                   atol: float = DEFAULT_ATOL, delta: float = LAUNCH_DELTA) -> float:
    """z_fwd(g0 + pi) - z_bwd(g0 + pi) for the separatrices of g0 and g0 + 2 pi.

    Positive exactly when the forward separatrix from g0 overshoots g0 + 2 pi
    (it has more energy than the one arriving there), negative when it turns
    back earlier; smooth and strictly decreasing in mu.
    """
    fwd = integrate_z(g0, 0.0, params, 1, math.pi, snap=False, rtol=rtol, atol=atol,
                      delta=delta, dg_sample=0.05, dxi_sample=1.0)
    bwd = integrate_z(g0 + TWO_PI, 0.0, params, -1, math.pi, snap=False, rtol=rtol,
                      atol=atol, delta=delta, dg_sample=0.05, dxi_sample=1.0)
    return float(fwd.z_values[-1] - bwd.z_values[0])


def solve_hat_mu(gamma: float, mu_tol: float = MU_TOL, k: int = 0, *,
                 rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL,
                 delta: float = LAUNCH_DELTA) -> ShootResult:
    """Dissipation mu_hat(gamma) at which the separatrix from g_k^M reaches g_{k+1}^M.

    The bracket is the proven bound interval widened by 10 %. The landing
    test is decided at the midpoint g_k^M + pi by ``separatrix_gap``. The
    returned curve is the forward separatrix from g_k^M glued there to the
    backward separatrix from g_{k+1}^M.
    """
    if not 0 < gamma < 1:
        raise GammaOutOfRange(f"mu_hat needs 0 < gamma < 1, got {gamma}")
    g0 = g_max(k, gamma)
    base = SystemParams(gamma=gamma, mu=0.0)

    def F(mu):
        return separatrix_gap(base.with_mu(mu), g0, rtol, atol, delta)

    lower, upper = hat_mu_bounds(gamma)
    lo, hi = 0.9 * lower, 1.1 * upper
    history: list[tuple[float, float]] = []
    mu = _bisect(F, lo, hi, F(lo), F(hi), lambda a, b: mu_tol, history)

    p = base.with_mu(mu)
    fwd = integrate_z(g0, 0.0, p, 1, math.pi + 0.25, snap=False, rtol=rtol, atol=atol,
                      delta=delta)
    bwd = integrate_z(g0 + TWO_PI, 0.0, p, -1, math.pi + 0.25, snap=False, rtol=rtol,
                      atol=atol, delta=delta)
    curve = join_curves(fwd, bwd, g0 + math.pi)
    I = curve.integral_w(g0, g0 + TWO_PI)
    return ShootResult(
        mu_star=mu, bracket_history=history, curve=curve,
        balance_residual=abs(mu * I - TWO_PI * gamma), gamma=gamma, g_launch=g0,
        loop_integral=I,
    )


def hat_mu_at_one(gammas=(0.999, 0.998, 0.996, 0.993), mu_tol: float = 1e-11):
    """Extrapolate mu_hat to gamma = 1 by a quadratic fit in c = sqrt(1 - gamma^2).

    mu_hat behaves like mu(1) - A c + O(c^2) as gamma -> 1, so a polynomial
    in c is the natural variable. Returns (value, spread) where ``spread``
    compares quadratic and linear fits on the same data.
    """
    c = np.array([math.sqrt(1.0 - g * g) for g in gammas])
    mus = np.array([solve_hat_mu(g, mu_tol).mu_star for g in gammas])
    quad = np.polyfit(c, mus, 2)
    lin = np.polyfit(c[:2], mus[:2], 1)
    return float(quad[-1]), float(abs(quad[-1] - lin[-1]))


def _check_bracket_top(gamma: float, z_M: float) -> float:
    top = 10.0
    if gamma < 1:
        top = max(top, hat_mu_bounds(gamma)[1])
    else:
        top = max(top, 2.0 * array_leading_order(gamma, z_M).mu)
    return top


def solve_check_mu(gamma: float, z_M: float, mu_tol: float = MU_TOL, k: int = 0, *,
                   rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL,
                   max_doublings: int = 60) -> ShootResult:
    """Dissipation mu_check(gamma, z_M) of the periodic orbit with z = z_M at the launch point.

    Launch point is g_k^M for gamma < 1 and (2k + 1/2) pi otherwise. The
    criterion z(g0 + 2 pi) - z_M starts at 2 pi gamma > 0 for mu = 0; the
    upper end of the bracket is doubled until it turns negative. Tolerance
    ``mu_tol`` is relative for mu > 1.
    """
    if z_M <= 0:
        raise ZMNonPositive(f"z_M must be > 0, got {z_M}")
    if gamma <= 0:
        raise GammaOutOfRange("periodic shooting needs gamma > 0")
    g0 = launch_point(gamma, k)
    base = SystemParams(gamma=gamma, mu=0.0)

    def F(mu):
        return shot_mismatch(base.with_mu(mu), g0, z_M, TWO_PI, rtol, atol)[0] - z_M

    lo, f_lo = 0.0, TWO_PI * gamma
    hi = _check_bracket_top(gamma, z_M)
    f_hi = F(hi)
    for _ in range(max_doublings):
        if f_hi < 0:
            break
        lo, f_lo = hi, f_hi
        hi *= 2.0
        f_hi = F(hi)
    else:
        raise BracketFailure(f"no sign change up to mu={hi}")
    history: list[tuple[float, float]] = []
    mu = _bisect(F, lo, hi, f_lo, f_hi, lambda a, b: mu_tol * max(1.0, b), history)
    return _periodic_result(gamma, mu, z_M, g0, history, rtol, atol)


def _periodic_result(gamma, mu, z_M, g0, history, rtol, atol) -> ShootResult:
    p = SystemParams(gamma=gamma, mu=mu)
    curve = integrate_z(g0, z_M, p, 1, 2 * TWO_PI, snap=False, rtol=rtol, atol=atol)
    I = loop_integral(curve, g0)
    inner = curve.g_grid[curve.g_grid <= curve.g_hi - TWO_PI]
    per = float(np.max(np.abs(curve.z(inner + TWO_PI) - curve.z(inner))))
    return ShootResult(
        mu_star=mu, bracket_history=history, curve=curve,
        balance_residual=abs(mu * I - TWO_PI * gamma), gamma=gamma, g_launch=g0,
        loop_integral=I, z_M=z_M, periodicity_residual=per,
    )


def solve_periodic_zm(gamma: float, mu: float, k: int = 0, *, z_rtol: float = 1e-14,
                      rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL) -> ShootResult:
    """Periodic orbit at fixed mu: root of the return map z(g0 + 2 pi) - z_M in log z_M.

    Requires 0 < mu < mu_hat(gamma) for gamma < 1 and mu > 0 for gamma > 1.
    """
    if gamma <= 0:
        raise GammaOutOfRange("periodic orbits need gamma > 0")
    if not mu > 0 or not math.isfinite(mu):
        raise ParamOutOfRange(f"mu must be finite and > 0, got {mu}")
    g0 = launch_point(gamma, k)
    p = SystemParams(gamma=gamma, mu=mu)

    def G(logz):
        z = math.exp(logz)
        return shot_mismatch(p, g0, z, TWO_PI, rtol, atol)[0] - z

    lo = math.log(1e-10)
    g_lo = G(lo)
    if g_lo <= 0:
        raise ParamOutOfRange(
            f"no periodic orbit at mu={mu}: return map is non-positive near z_M=0")
    # balance mu I = 2 pi gamma with I ~ 2 pi sqrt(2 z) suggests z ~ (gamma/mu)^2 / 2
    hi = math.log(max(1.0, (gamma / mu) ** 2))
    g_hi = G(hi)
    while g_hi >= 0:
        lo, g_lo = hi, g_hi
        hi += math.log(4.0)
        g_hi = G(hi)
        if hi > math.log(1e12):
            raise BracketFailure("return map stays positive")
    logz = brentq(G, lo, hi, xtol=1e-15, rtol=max(z_rtol, 4 * np.finfo(float).eps))
    z_M = math.exp(logz)
    return _periodic_result(gamma, mu, z_M, g0, [(lo, hi)], rtol, atol)


# ---------------------------------------------------------------------------
# half-array


@dataclass(frozen=True, eq=False)
class HalfArrayCurve:
    """Separatrix z_bar from g0 relaxing onto the periodic orbit z_check.

    ``w_samples`` holds (g, w) with w = z_bar - z_check; ``decay_rate`` is
    the fitted exponent of |w| in g; ``decay_bound`` the guaranteed rate
    mu / sqrt(2 (max z_check + |w(g0)|)); ``rho_offset`` the integral
    int_{g_ref}^inf [1/sqrt(2 z_bar) - 1/sqrt(2 z_check)] with g_ref = g0 + pi,
    its part beyond the integrated span summed as a geometric series with
    per-period ratio ``tail_ratio`` (that part is ``rho_tail``).
    """

    zbar: KineticCurve
    zcheck: KineticCurve
    check: ShootResult
    g0: float
    w_g: np.ndarray
    w_values: np.ndarray
    decay_rate: float
    decay_bound: float
    rho_offset: float
    g_ref: float
    tail_ratio: float = 0.0
    rho_tail: float = 0.0

    @property
    def w_samples(self) -> np.ndarray:
        return np.column_stack([self.w_g, self.w_values])

    def zcheck_at(self, g):
        """Periodic extension of the reference curve."""
        g = np.asarray(g, dtype=float)
        red = self.g0 + np.mod(g - self.g0, TWO_PI)
        return self.zcheck.z(np.clip(red, self.zcheck.g_lo, self.zcheck.g_hi))


def half_array_curve(gamma: float, mu: float, span: int = 40, k: int = 0, *,
                     hat_mu: float | None = None, rtol: float = DEFAULT_RTOL,
                     atol: float = DEFAULT_ATOL) -> HalfArrayCurve:
    """Separatrix from g_k^M at mu < mu_hat and its periodic limit at the same mu.

    Parameters
    ----------
    span : int
        Number of periods to integrate (at least 3).
    hat_mu : float, optional
        Precomputed mu_hat(gamma); solved for when omitted.
    """
    if not 0 < gamma < 1:
        raise GammaOutOfRange(f"half-arrays need 0 < gamma < 1, got {gamma}")
    if span < 3:
        raise SpanTooShort(f"decay fit needs at least 3 periods, got {span}")
    if hat_mu is None:
        hat_mu = solve_hat_mu(gamma).mu_star
    if not 0 < mu < hat_mu:
        raise MuNotBelowHatMu(f"need 0 < mu < mu_hat={hat_mu}, got {mu}")
    g0 = g_max(k, gamma)
    p = SystemParams(gamma=gamma, mu=mu)
    zbar = integrate_z(g0, 0.0, p, 1, span * TWO_PI, snap=False, rtol=rtol, atol=atol)
    check = solve_periodic_zm(gamma, mu, k, rtol=rtol, atol=atol)
    zcheck = check.curve

    def zc(g):
        red = g0 + np.mod(np.asarray(g, dtype=float) - g0, TWO_PI)
        return zcheck.z(np.clip(red, zcheck.g_lo, zcheck.g_hi))

    g = zbar.g_grid
    w = zbar.z_values - zc(g)
    g_end = zbar.g_hi
    tail = (g >= g0 + 0.4 * (g_end - g0)) & (w != 0)
    slope = np.polyfit(g[tail] - g0, np.log(np.abs(w[tail])), 1)[0]
    zmax = float(np.max(zcheck.z_values))
    bound = mu / math.sqrt(2.0 * (zmax + abs(w[0])))

    g_ref = g0 + math.pi

    def integrand(s):
        return 1.0 / zbar.w(s) - 1.0 / np.sqrt(2.0 * zc(s))

    rho = _composite_integral(integrand, g, g_ref, g_end)
    # beyond g_end the per-period contributions shrink geometrically
    last = _composite_integral(integrand, g, g_end - TWO_PI, g_end)
    prev = _composite_integral(integrand, g, g_end - 2 * TWO_PI, g_end - TWO_PI)
    q = last / prev if prev != 0 else 0.0
    rest = 0.0
    if 0 < q < 1:
        rest = last * q / (1.0 - q)
        rho += rest
    else:
        q = 0.0
    return HalfArrayCurve(
        zbar=zbar, zcheck=zcheck, check=check, g0=g0, w_g=g, w_values=w,
        decay_rate=float(-slope), decay_bound=bound, rho_offset=rho, g_ref=g_ref,
        tail_ratio=q, rho_tail=rest,
    )


# ---------------------------------------------------------------------------
# gamma > 1


def unit_velocity_profile(gamma: float, alpha: float, samples: int = 1024,
                          xi_anchor: float = 0.0) -> tuple[WaveProfile, float]:
    """Profile of the first-order branch alpha g' = gamma - sin g (|v| = 1).

    Returns the linear-periodic profile anchored at g(xi_anchor) = pi/2 + pi
    and its period Xi = alpha int_0^{2 pi} ds / (gamma - sin s).
    """
    if not gamma > 1 or is_gamma_one(gamma):
        raise GammaNotAboveOne(f"unit-velocity waves need gamma > 1, got {gamma}")
    if not alpha > 0:
        raise DomainError(f"alpha must be > 0, got {alpha}")
    g0 = launch_point(gamma, 0)
    g = g0 + np.linspace(0.0, TWO_PI, samples + 1)

    def inv_speed(s):
        return alpha / (gamma - np.sin(s))

    cum = _cumulative_integral(inv_speed, g)
    xi_mid = _composite_integral(inv_speed, g, g0, g0 + math.pi)
    xi = xi_anchor + cum - xi_mid
    u = (gamma - np.sin(g)) / alpha
    d2 = -np.cos(g) * u / alpha
    profile = WaveProfile(
        xi_grid=xi, g_values=g, u_values=u, origin=(xi_anchor, g0 + math.pi),
        gamma=gamma, mu=math.inf, period=float(cum[-1]), d2_values=d2,
    )
    return profile, float(cum[-1])


@dataclass(frozen=True)
class ArrayPrediction:
    mu: float
    I: float
    Xi: float
    v: float


def array_leading_order(gamma: float, z_M: float, alpha: float = 1.0) -> ArrayPrediction:
    """Leading-order array parameters for gamma > 1 and small z_M.

    mu ~ (gamma - 1)/sqrt(2 z_M), I ~ 2 pi gamma / mu and
    Xi ~ 2 pi mu / sqrt(gamma^2 - 1) from the overdamped slow manifold
    u = (gamma - sin g)/mu; v = mu / sqrt(alpha^2 + mu^2).
    """
    if not gamma > 1 or is_gamma_one(gamma):
        raise GammaNotAboveOne(f"leading-order arrays need gamma > 1, got {gamma}")
    if z_M <= 0:
        raise ZMNonPositive(f"z_M must be > 0, got {z_M}")
    root = math.sqrt(2.0 * z_M)
    mu = (gamma - 1.0) / root
    I = root * TWO_PI * gamma / (gamma - 1.0)
    Xi = TWO_PI * mu / math.sqrt(gamma * gamma - 1.0)
    v = (gamma - 1.0) / math.sqrt(2.0 * z_M * alpha * alpha + (gamma - 1.0) ** 2)
    return ArrayPrediction(mu=mu, I=I, Xi=Xi, v=v)
