"""First-order reduction of the travelling-wave ODE

    g'' + mu g' + sin g - gamma = 0

to the kinetic-energy curve z(g) = u(g)^2 / 2, which solves

    z_g = gamma - sin g - epsilon mu sqrt(2 z)

on a monotone branch with sign epsilon = sign(u).

Integration is carried out on the regular autonomous system in the 'time'
xi (the g-parametrized form is singular where z vanishes) and the curve is
then resampled densely in g, where z(g) is represented by a cubic Hermite
interpolant built from the exact slope z_g at every node.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline

from .errors import (
    DomainError,
    DomainTooShort,
    IntegrationFailure,
    NegativeInitialEnergy,
    OutOfProfileRange,
    SingularLaunchAtNonSaddle,
    ZeroEnergyInInterior,
)
from .washboard import (
    SystemParams,
    is_gamma_one,
    potential,
    saddle_locations,
    separatrix_slopes,
)

TWO_PI = 2.0 * math.pi

DEFAULT_RTOL = 1e-11
DEFAULT_ATOL = 1e-14
LAUNCH_DELTA = 1e-6
SNAP_RADIUS = 1e-4
SNAP_REL = 0.02
Z_CAP = 1e6
STIFF_MU = 20.0

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


class Endpoint(str, Enum):
    SADDLE_TOUCH = "saddle_touch"
    ZERO_CROSSING = "zero_crossing"
    TRUNCATED = "truncated"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True, eq=False)
class KineticCurve:
    """Sampled solution z(g) of the first-order problem on one monotone branch.

    Nodes are sorted by increasing g. ``u_values`` carries the sign epsilon,
    ``xi_values`` is the ODE 'time' at each node (``+-inf`` on saddle nodes)
    and ``j_values`` an antiderivative of sqrt(2 z) in g.
    """

    g_grid: np.ndarray
    z_values: np.ndarray
    u_values: np.ndarray
    xi_values: np.ndarray
    j_values: np.ndarray
    params: SystemParams
    g0: float
    z0: float
    endpoint_left: Endpoint
    endpoint_right: Endpoint

    @property
    def epsilon(self) -> int:
        return self.params.epsilon

    @property
    def g_lo(self) -> float:
        return float(self.g_grid[0])

    @property
    def g_hi(self) -> float:
        return float(self.g_grid[-1])

    @cached_property
    def zg_values(self) -> np.ndarray:
        p = self.params
        return p.gamma - np.sin(self.g_grid) - p.mu * self.u_values

    @cached_property
    def e_values(self) -> np.ndarray:
        """Total energy e = z + U along the curve."""
        return self.z_values + potential(self.g_grid, self.params.gamma)

    @cached_property
    def _spline(self) -> CubicHermiteSpline:
        return CubicHermiteSpline(self.g_grid, self.z_values, self.zg_values,
                                  extrapolate=False)

    def z(self, g):
        """Interpolated kinetic energy, clipped at 0."""
        out = np.maximum(self._spline(np.asarray(g, dtype=float)), 0.0)
        return float(out) if np.ndim(out) == 0 else out

    def w(self, g):
        """sqrt(2 z(g)) = |u(g)|."""
        return np.sqrt(2.0 * np.asarray(self.z(g)))

    def contains(self, g_a: float, g_b: float, tol: float = 1e-12) -> bool:
        return self.g_lo - tol <= g_a and g_b <= self.g_hi + tol

    def integral_w(self, g_a: float, g_b: float) -> float:
        """Composite Gauss-Legendre value of int_{g_a}^{g_b} sqrt(2 z) ds."""
        return _composite_integral(self.w, self.g_grid, g_a, g_b)


@dataclass(frozen=True)
class SaddleTail:
    """Exponential approach to a saddle, g = g_s + (g_ref - g_s) exp(rate (xi - xi_ref))."""

    g_saddle: float
    xi_ref: float
    g_ref: float
    rate: float

    def __call__(self, xi: np.ndarray, nu: int = 0) -> np.ndarray:
        d = (self.g_ref - self.g_saddle) * np.exp(self.rate * (xi - self.xi_ref))
        if nu == 0:
            return self.g_saddle + d
        return self.rate ** nu * d


class QuinticHermite:
    """C^2 piecewise quintic through values, first and second derivatives."""

    # rows: basis functions for p0, p0', p0'', p1, p1', p1''; columns: t^0..t^5
    _C = np.array([
        [1, 0, 0, -10, 15, -6],
        [0, 1, 0, -6, 8, -3],
        [0, 0, 0.5, -1.5, 1.5, -0.5],
        [0, 0, 0, 10, -15, 6],
        [0, 0, 0, -4, 7, -3],
        [0, 0, 0, 0.5, -1, 0.5],
    ], dtype=float)

    def __init__(self, x, y, dy, d2y):
        self.x = np.asarray(x, dtype=float)
        self.y = np.asarray(y, dtype=float)
        self.dy = np.asarray(dy, dtype=float)
        self.d2y = np.asarray(d2y, dtype=float)
        if np.any(np.diff(self.x) <= 0):
            raise ValueError("x must be strictly increasing")

    def __call__(self, xq, nu: int = 0) -> np.ndarray:
        xq = np.asarray(xq, dtype=float)
        i = np.clip(np.searchsorted(self.x, xq, side="right") - 1, 0, len(self.x) - 2)
        h = self.x[i + 1] - self.x[i]
        t = (xq - self.x[i]) / h
        coef = np.stack([
            self.y[i], h * self.dy[i], h * h * self.d2y[i],
            self.y[i + 1], h * self.dy[i + 1], h * h * self.d2y[i + 1],
        ])
        poly = self._C
        for _ in range(nu):
            poly = poly[:, 1:] * np.arange(1, poly.shape[1])
        powers = t[..., None] ** np.arange(poly.shape[1])
        basis = powers @ poly.T
        val = np.einsum("...k,k...->...", basis, coef)
        return val / h ** nu


@dataclass(frozen=True, eq=False)
class WaveProfile:
    """Sampled travelling-wave profile g(xi) with its derivative u = g'.

    Between samples g is a C^2 quintic built from (g, g', g'') where
    g'' = gamma - sin g - mu g' unless ``d2_values`` is given. Outside the
    sampled window the profile is continued by ``left_tail``/``right_tail`` or, when ``period`` is set,
    by linear-periodicity g(xi + period) = g(xi) + 2 pi.
    """

    xi_grid: np.ndarray
    g_values: np.ndarray
    u_values: np.ndarray
    origin: tuple[float, float]
    gamma: float
    mu: float
    period: float | None = None
    left_tail: Callable | None = None
    right_tail: Callable | None = None
    d2_values: np.ndarray | None = None
    _interp: QuinticHermite = field(init=False, repr=False)

    def __post_init__(self):
        if self.d2_values is None:
            gpp = self.gamma - np.sin(self.g_values) - self.mu * self.u_values
        else:
            gpp = self.d2_values
        object.__setattr__(self, "_interp",
                           QuinticHermite(self.xi_grid, self.g_values, self.u_values, gpp))

    @property
    def xi_lo(self) -> float:
        return float(self.xi_grid[0])

    @property
    def xi_hi(self) -> float:
        return float(self.xi_grid[-1])

    def evaluate(self, xi, nu: int = 0):
        """g^(nu)(xi) for nu in {0, 1, 2}."""
        xi = np.asarray(xi, dtype=float)
        if self.period is not None:
            n = np.floor((xi - self.xi_lo) / self.period)
            red = xi - n * self.period
            out = self._interp(red, nu)
            if nu == 0:
                out = out + TWO_PI * n
            return out
        out = np.array(self._interp(np.clip(xi, self.xi_lo, self.xi_hi), nu), dtype=float)
        lo = xi < self.xi_lo
        hi = xi > self.xi_hi
        if np.any(lo):
            if self.left_tail is None:
                raise OutOfProfileRange(f"xi below profile window {self.xi_lo}")
            out[lo] = self.left_tail(xi[lo], nu)
        if np.any(hi):
            if self.right_tail is None:
                raise OutOfProfileRange(f"xi above profile window {self.xi_hi}")
            out[hi] = self.right_tail(xi[hi], nu)
        return out


# ---------------------------------------------------------------------------
# quadrature helpers


def _panel_integrals(f, x: np.ndarray) -> np.ndarray:
    """Gauss-Legendre (8 point) integral of f over each panel [x_i, x_{i+1}]."""
    a = x[:-1]
    b = x[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    pts = mid[:, None] + half[:, None] * _GL_X[None, :]
    vals = np.asarray(f(pts.ravel())).reshape(pts.shape)
    return half * (vals @ _GL_W)


def _composite_integral(f, nodes: np.ndarray, a: float, b: float) -> float:
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    inner = nodes[(nodes > a) & (nodes < b)]
    x = np.concatenate([[a], inner, [b]])
    return sign * float(np.sum(_panel_integrals(f, x)))


def _cumulative_integral(f, x: np.ndarray) -> np.ndarray:
    return np.concatenate([[0.0], np.cumsum(_panel_integrals(f, x))])


# ---------------------------------------------------------------------------
# integration


def _saddle_near(gamma: float, g: float, radius: float) -> float | None:
    if gamma > 1 and not is_gamma_one(gamma):
        return None
    s = saddle_locations(gamma, g - radius, g + radius)
    return float(s[0]) if s.size else None


def _distance_to_saddle(gamma: float, g: float, skip: float | None) -> float:
    if gamma > 1 and not is_gamma_one(gamma):
        return math.inf
    s = saddle_locations(gamma, g - 4.0, g + 4.0)
    if skip is not None:
        s = s[np.abs(s - skip) > 1e-9]
    return float(np.min(np.abs(s - g))) if s.size else math.inf


def _sample_segment(sol, t0: float, t1: float, dg: float, dxi: float) -> np.ndarray:
    ts = np.asarray(sol.ts)
    ts = ts[(ts >= min(t0, t1)) & (ts <= max(t0, t1))]
    ts = np.unique(np.concatenate([[t0, t1], ts]))
    y = sol(ts)
    pieces = [ts[:1]]
    for k in range(len(ts) - 1):
        n = int(min(400, max(1, math.ceil(max(abs(y[0, k + 1] - y[0, k]) / dg,
                                              (ts[k + 1] - ts[k]) / dxi)))))
        pieces.append(np.linspace(ts[k], ts[k + 1], n + 1)[1:])
    return np.concatenate(pieces)


def integrate_z(
    g0: float,
    z0: float,
    params: SystemParams,
    direction: int = 1,
    g_max_span: float = TWO_PI,
    *,
    separatrix: bool | None = None,
    delta: float = LAUNCH_DELTA,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    z_cap: float = Z_CAP,
    snap: bool = True,
    snap_radius: float = SNAP_RADIUS,
    snap_rel: float = SNAP_REL,
    xi_max: float = 1e5,
    dg_sample: float = 5e-3,
    dxi_sample: float = 2e-2,
    method: str = "auto",
) -> KineticCurve:
    """Integrate the kinetic-energy curve from (g0, z0) in the g-direction ``direction``.

    Parameters
    ----------
    g0, z0 : float
        Initial position and kinetic energy (z0 >= 0).
    params : SystemParams
        Supplies gamma, mu and the branch sign epsilon = sign(u).
    direction : {+1, -1}
        Integrate towards larger (+1) or smaller (-1) g.
    g_max_span : float
        Stop after |g - g0| reaches this span (endpoint ``truncated``).
    separatrix : bool, optional
        Launch along a separatrix. Defaults to True when z0 == 0 and g0 is a
        maximum of U; requesting it elsewhere raises
        SingularLaunchAtNonSaddle.
    snap : bool
        When the path enters a ``snap_radius`` ball around a saddle with
        velocity matching the separatrix law to relative ``snap_rel``, end
        it there as ``saddle_touch``.

    Returns
    -------
    KineticCurve
    """
    if z0 < 0:
        raise NegativeInitialEnergy(f"z0={z0} < 0")
    if direction not in (1, -1):
        raise DomainError("direction must be +1 or -1")
    gamma, mu, eps = params.gamma, params.mu, params.epsilon
    at_saddle = z0 == 0 and gamma < 1 and _saddle_near(gamma, g0, 1e-12) is not None
    if separatrix is None:
        separatrix = at_saddle
    if separatrix and not at_saddle:
        raise SingularLaunchAtNonSaddle(f"g0={g0} is not a maximum of U for gamma={gamma}")

    s = direction * eps  # sign of d xi along the integration
    prefix = None
    skip = None
    if separatrix:
        slopes = separatrix_slopes(mu, gamma)
        slope = slopes[(-1, eps)] if direction > 0 else slopes[(1, eps)]
        g_start = g0 + direction * delta
        u_start = abs(slope) * delta * eps
        j_start = 0.5 * abs(slope) * delta * delta * direction
        prefix = (g0, 0.0, -s * math.inf, 0.0)
        skip = g0
    else:
        g_start, u_start, j_start = g0, eps * math.sqrt(2.0 * z0), 0.0
        if z0 == 0:
            force = gamma - math.sin(g0)
            if force == 0 or np.sign(force) != direction:
                raise DomainError(
                    f"particle at rest at g0={g0} cannot move in direction {direction}")
            skip = g0
    g_end = g0 + direction * g_max_span

    stiff = method == "Radau" or (method == "auto" and mu > STIFF_MU)
    solver = "Radau" if stiff else "DOP853"

    def rhs(t, y):
        g, u = y[0], y[1]
        return [s * u, s * (gamma - math.sin(g) - mu * u), s * u * abs(u)]

    def jac(t, y):
        g, u = y[0], y[1]
        return [[0.0, s, 0.0], [-s * math.cos(g), -s * mu, 0.0], [0.0, 2 * s * abs(u), 0.0]]

    def ev_turn(t, y):
        return eps * y[1]
    ev_turn.terminal = True
    ev_turn.direction = -1

    def ev_span(t, y):
        return direction * (y[0] - g_end)
    ev_span.terminal = True
    ev_span.direction = 1

    def ev_cap(t, y):
        return 0.5 * y[1] * y[1] - z_cap
    ev_cap.terminal = True
    ev_cap.direction = 1

    skip_box = [skip]

    def ev_snap(t, y):
        return _distance_to_saddle(gamma, y[0], skip_box[0]) - snap_radius
    ev_snap.terminal = True
    ev_snap.direction = -1

    events = [ev_turn, ev_span, ev_cap]
    has_saddles = gamma < 1 or is_gamma_one(gamma)
    if snap and has_saddles:
        events.append(ev_snap)

    y = np.array([g_start, u_start, j_start], dtype=float)
    t = 0.0
    segments: list[tuple[object, float, float]] = []
    end_kind = Endpoint.TRUNCATED
    snapped_at = None
    atol_vec = [atol * 100, atol, atol * 100]
    while True:
        kwargs = dict(method=solver, rtol=rtol, atol=atol_vec, events=events,
                      dense_output=True)
        if stiff:
            kwargs["jac"] = jac
        res = solve_ivp(rhs, (t, xi_max), y, **kwargs)
        if res.status == -1:
            raise IntegrationFailure(res.message)
        segments.append((res.sol, t, res.t[-1]))
        t = res.t[-1]
        y = res.y[:, -1]
        if res.status == 0:
            end_kind = Endpoint.TRUNCATED
            break
        fired = [(te[0], k) for k, te in enumerate(res.t_events) if te.size]
        k = min(fired)[1]
        if k == 0:
            end_kind = Endpoint.ZERO_CROSSING
            y[1] = 0.0
        elif k == 1:
            end_kind = Endpoint.TRUNCATED
        elif k == 2:
            end_kind = Endpoint.UNBOUNDED
        else:
            gs = _saddle_near(gamma, y[0], 2 * snap_radius)
            dist = abs(y[0] - gs)
            if is_gamma_one(gamma):
                law = 0.0
            else:
                sl = separatrix_slopes(mu, gamma)
                law = abs(sl[(1, eps)] if y[0] < gs else sl[(-1, eps)]) * dist
            moving_in = (gs - y[0]) * direction > 0
            if moving_in and law > 0 and abs(abs(y[1]) / law - 1.0) <= snap_rel:
                end_kind = Endpoint.SADDLE_TOUCH
                snapped_at = (gs, y[2] + direction * 0.5 * abs(y[1]) * dist)
                break
            skip_box[0] = gs
            continue
        break

    # dense resampling
    ts_all, ys_all = [], []
    for sol, ta, tb in segments:
        ts = _sample_segment(sol, ta, tb, dg_sample, dxi_sample)
        ys = sol(ts)
        ts_all.append(ts)
        ys_all.append(ys)
    ts = np.concatenate(ts_all)
    ys = np.concatenate(ys_all, axis=1)
    g, u, j = ys
    u = np.where(eps * u < 0, 0.0, u)
    xi = s * ts
    if end_kind is Endpoint.ZERO_CROSSING:
        u[-1] = 0.0
    nodes = [(g, u, xi, j)]
    if prefix is not None:
        nodes.insert(0, tuple(np.array([v]) for v in prefix))
    if snapped_at is not None:
        nodes.append((np.array([snapped_at[0]]), np.array([0.0]),
                      np.array([s * math.inf]), np.array([snapped_at[1]])))
    g = np.concatenate([n[0] for n in nodes])
    u = np.concatenate([n[1] for n in nodes])
    xi = np.concatenate([n[2] for n in nodes])
    j = np.concatenate([n[3] for n in nodes])

    start_kind = Endpoint.SADDLE_TOUCH if separatrix else (
        Endpoint.ZERO_CROSSING if z0 == 0 else Endpoint.TRUNCATED)
    if direction > 0:
        left_kind, right_kind = start_kind, end_kind
    else:
        g, u, xi, j = g[::-1], u[::-1], xi[::-1], j[::-1]
        left_kind, right_kind = end_kind, start_kind
    keep = np.concatenate([[True], np.diff(g) > 1e-14 * (1.0 + np.abs(g[1:]))])
    g, u, xi, j = g[keep], u[keep], xi[keep], j[keep]
    return KineticCurve(
        g_grid=g, z_values=0.5 * u * u, u_values=u, xi_values=xi, j_values=j,
        params=params, g0=g0, z0=z0, endpoint_left=left_kind, endpoint_right=right_kind,
    )


def join_curves(left: KineticCurve, right: KineticCurve, g_join: float) -> KineticCurve:
    """Glue ``left`` (on g <= g_join) to ``right`` (on g >= g_join).

    Both must share params and cover g_join. The 'time' and the sqrt(2z)
    antiderivative of ``right`` are shifted to be continuous at the seam.
    """
    if not (left.contains(g_join, g_join) and right.contains(g_join, g_join)):
        raise DomainError("join point outside one of the curves")
    li = np.searchsorted(left.g_grid, g_join, side="right")
    ri = np.searchsorted(right.g_grid, g_join, side="left")

    def at(curve: KineticCurve, arr: np.ndarray) -> float:
        fin = np.isfinite(arr)
        return float(np.interp(g_join, curve.g_grid[fin], arr[fin]))

    dxi = at(left, left.xi_values) - at(right, right.xi_values)
    dj = at(left, left.j_values) - at(right, right.j_values)
    g = np.concatenate([left.g_grid[:li], right.g_grid[ri:]])
    u = np.concatenate([left.u_values[:li], right.u_values[ri:]])
    xi = np.concatenate([left.xi_values[:li], right.xi_values[ri:] + dxi])
    j = np.concatenate([left.j_values[:li], right.j_values[ri:] + dj])
    keep = np.concatenate([[True], np.diff(g) > 1e-14 * (1.0 + np.abs(g[1:]))])
    return KineticCurve(
        g_grid=g[keep], z_values=0.5 * u[keep] ** 2, u_values=u[keep], xi_values=xi[keep],
        j_values=j[keep], params=left.params, g0=left.g0, z0=left.z0,
        endpoint_left=left.endpoint_left, endpoint_right=right.endpoint_right,
    )


# ---------------------------------------------------------------------------
# checks and derived quantities


def volterra_residual(curve: KineticCurve) -> float:
    """Max over nodes of |z(g) - z(g0) - U(g0) + U(g) + eps mu int_{g0}^g sqrt(2z)|.

    The integral is an independent composite Gauss-Legendre quadrature of the
    interpolated curve, anchored at the curve's initial node.
    """
    p = curve.params
    g = curve.g_grid
    cum = _cumulative_integral(curve.w, g)
    i0 = int(np.argmin(np.abs(g - curve.g0)))
    integral = cum - cum[i0]
    U = potential(g, p.gamma)
    res = curve.z_values - curve.z_values[i0] - U[i0] + U + p.epsilon * p.mu * integral
    return float(np.max(np.abs(res)))


def loop_integral(curve: KineticCurve, g: float, tol: float = 1e-9) -> float:
    """I(z, g) = int_g^{g + 2 pi} sqrt(2 z(s)) ds."""
    if not curve.contains(g, g + TWO_PI, tol):
        raise DomainTooShort(
            f"[{g}, {g + TWO_PI}] not inside curve domain [{curve.g_lo}, {curve.g_hi}]")
    a = max(g, curve.g_lo)
    b = min(g + TWO_PI, curve.g_hi)
    return curve.integral_w(a, b)


def step_relation_check(curve: KineticCurve, g0: float) -> np.ndarray:
    """Residuals of z(g_{k+1}) - z(g_k) = 2 pi gamma - eps mu I_k for g_k = g0 + 2 pi k."""
    p = curve.params
    k_lo = math.ceil((curve.g_lo - g0) / TWO_PI - 1e-9)
    k_hi = math.floor((curve.g_hi - g0) / TWO_PI + 1e-9)
    if k_hi - k_lo < 1:
        raise DomainTooShort("curve spans fewer than one full period from g0")
    out = []
    for k in range(k_lo, k_hi):
        gk = g0 + TWO_PI * k
        gk = min(max(gk, curve.g_lo), curve.g_hi)
        gk1 = min(gk + TWO_PI, curve.g_hi)
        ik = loop_integral(curve, gk)
        lhs = curve.z(gk1) - curve.z(gk)
        out.append(lhs - (TWO_PI * p.gamma - p.epsilon * p.mu * ik))
    return np.asarray(out)


def step_differences(curve: KineticCurve, g0: float) -> np.ndarray:
    """z(g_{k+1}) - z(g_k) for every full period inside the curve."""
    k_lo = math.ceil((curve.g_lo - g0) / TWO_PI - 1e-9)
    k_hi = math.floor((curve.g_hi - g0) / TWO_PI + 1e-9)
    gk = g0 + TWO_PI * np.arange(k_lo, k_hi + 1)
    gk = np.clip(gk, curve.g_lo, curve.g_hi)
    return np.diff(curve.z(gk))


def quadrature_xi(
    curve: KineticCurve,
    g_anchor: float,
    xi_anchor: float = 0.0,
    reach_tol: float = 1e-9,
) -> WaveProfile:
    """Recover g(xi) from xi - xi_anchor = eps int_{g_anchor}^g ds / sqrt(2 z(s)).

    Nodes with z == 0 at saddle endpoints are dropped (they sit at xi = +-inf)
    and replaced by exponential tails following the linear vanishing law of
    the separatrix; nodes closer than ``reach_tol`` to such an endpoint are
    dropped as well.
    """
    p = curve.params
    g = curve.g_grid
    z = curve.z_values
    keep = np.ones(g.size, dtype=bool)
    if curve.endpoint_left is Endpoint.SADDLE_TOUCH:
        keep &= g - curve.g_lo > reach_tol
    if curve.endpoint_right is Endpoint.SADDLE_TOUCH:
        keep &= curve.g_hi - g > reach_tol
    interior = np.zeros(g.size, dtype=bool)
    interior[1:-1] = True
    if np.any(interior & (z <= 0)):
        bad = g[interior & (z <= 0)][0]
        raise ZeroEnergyInInterior(f"z vanishes at interior node g={bad}")
    for side, kind in ((0, curve.endpoint_left), (-1, curve.endpoint_right)):
        if kind is not Endpoint.SADDLE_TOUCH and z[side] <= 0:
            keep[side] = False
    gk = g[keep]
    if not (gk[0] <= g_anchor <= gk[-1]):
        raise DomainError(f"anchor g={g_anchor} outside [{gk[0]}, {gk[-1]}]")

    def inv_w(s):
        return 1.0 / curve.w(s)

    x = np.unique(np.concatenate([gk, [g_anchor]]))
    cum = _cumulative_integral(inv_w, x)
    ia = int(np.searchsorted(x, g_anchor))
    xi_x = xi_anchor + p.epsilon * (cum - cum[ia])
    xi = xi_x[np.searchsorted(x, gk)]
    u = p.epsilon * np.sqrt(2.0 * z[keep])
    order = np.argsort(xi)
    xi, gv, u = xi[order], gk[order], u[order]

    def tail(end: int, kind: Endpoint, g_end: float):
        if kind is not Endpoint.SADDLE_TOUCH:
            return None
        rate = u[end] / (gv[end] - g_end)
        return SaddleTail(g_saddle=g_end, xi_ref=xi[end], g_ref=gv[end], rate=rate)

    if p.epsilon > 0:
        lt = tail(0, curve.endpoint_left, curve.g_lo)
        rt = tail(-1, curve.endpoint_right, curve.g_hi)
    else:
        lt = tail(0, curve.endpoint_right, curve.g_hi)
        rt = tail(-1, curve.endpoint_left, curve.g_lo)
    return WaveProfile(
        xi_grid=xi, g_values=gv, u_values=u, origin=(xi_anchor, g_anchor),
        gamma=p.gamma, mu=p.mu, left_tail=lt, right_tail=rt,
    )


def periodic_profile(
    curve: KineticCurve,
    g_start: float,
    g_anchor: float | None = None,
    xi_anchor: float = 0.0,
) -> WaveProfile:
    """Linear-periodic profile from one period [g_start, g_start + 2 pi] of ``curve``.

    The last node reuses the state at ``g_start`` so the extension
    g(xi + Xi) = g(xi) + 2 pi is exact. ``g_anchor`` defaults to the middle
    of the period.
    """
    p = curve.params
    if p.epsilon < 0:
        raise DomainError("periodic profiles need epsilon = +1")
    if not curve.contains(g_start, g_start + TWO_PI, 1e-9):
        raise DomainTooShort("curve does not cover a full period")
    g_end = g_start + TWO_PI
    inner = curve.g_grid[(curve.g_grid > g_start + 1e-12) & (curve.g_grid < g_end - 1e-12)]
    g = np.concatenate([[g_start], inner, [g_end]])
    z = curve.z(g)
    z[-1] = z[0]
    if np.any(z <= 0):
        raise ZeroEnergyInInterior("kinetic energy vanishes inside the period")
    w = np.sqrt(2.0 * z)

    def inv_w(s):
        return 1.0 / curve.w(s)

    cum = _cumulative_integral(inv_w, g)
    if g_anchor is None:
        g_anchor = g_start + math.pi
    xi_a = _composite_integral(inv_w, g, g_start, g_anchor)
    xi = xi_anchor + cum - xi_a
    return WaveProfile(
        xi_grid=xi, g_values=g, u_values=w, origin=(xi_anchor, g_anchor),
        gamma=p.gamma, mu=p.mu, period=float(cum[-1]),
    )
