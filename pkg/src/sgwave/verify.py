"""Independent checks of constructed waves.

* finite-difference residual of the field equation and its order under
  refinement,
* tail limits and exponential approach rates,
* a sweep of mu_hat against its proven bounds,
* a leapfrog method-of-lines evolution as a heuristic stability probe.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import CFLViolation, DomainError, GridOutOfRange, OutOfProfileRange
from .families import Family, WaveSolution, circle_wrap, map_to_xt, phi
from .shooting import MU_TOL, first_order_hat_mu, hat_mu_bounds, solve_hat_mu

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# field-equation residual


@dataclass(frozen=True)
class ResidualReport:
    x_range: tuple[float, float]
    t_range: tuple[float, float]
    steps: list[float]
    max_residuals: list[float]
    orders: list[float]

    @property
    def max_residual(self) -> float:
        return self.max_residuals[-1]

    @property
    def order(self) -> float:
        """Observed order between the two finest levels (nan if the residual is zero)."""
        return self.orders[-1] if self.orders else math.nan


def _stencil_residual(solution: WaveSolution, x: np.ndarray, t: np.ndarray, h: float):
    f = lambda dx, dt: phi(solution, x + dx, t + dt)  # noqa: E731
    c = f(0.0, 0.0)
    ftt = (f(0.0, h) - 2.0 * c + f(0.0, -h)) / (h * h)
    fxx = (f(h, 0.0) - 2.0 * c + f(-h, 0.0)) / (h * h)
    ft = (f(0.0, h) - f(0.0, -h)) / (2.0 * h)
    return ftt - fxx + np.sin(c) + solution.alpha * ft + solution.gamma


def _check_window(solution: WaveSolution, x: np.ndarray, t: np.ndarray, h: float):
    prof = solution.profile
    if prof is None or prof.period is not None:
        return
    corners = []
    for dx in (-h, h):
        for dt in (-h, h):
            corners.append(solution.xi_of(x + dx, t + dt))
    arg = np.concatenate([c.ravel() for c in corners])
    if arg.min() < prof.xi_lo or arg.max() > prof.xi_hi:
        raise GridOutOfRange(
            f"stencil reaches profile argument [{arg.min():.3g}, {arg.max():.3g}] outside "
            f"the sampled window [{prof.xi_lo:.3g}, {prof.xi_hi:.3g}]")


def pde_residual(solution: WaveSolution, x_range=(-5.0, 5.0), t_range=(0.0, 1.0),
                 n_points: tuple[int, int] = (41, 5), h: float = 0.08,
                 levels: int = 3) -> ResidualReport:
    """Centered-difference residual phi_tt - phi_xx + sin phi + alpha phi_t + gamma.

    Evaluated on an ``n_points`` grid of (x, t) with stencil widths
    h, h/2, ... (``levels`` of them); ``orders`` are log2 ratios of
    successive maximum residuals.
    """
    x = np.linspace(*x_range, n_points[0])
    t = np.linspace(*t_range, n_points[1])
    X, T = np.meshgrid(x, t, indexing="ij")
    steps = [h / 2 ** k for k in range(levels)]
    _check_window(solution, X, T, steps[0])
    res = []
    for hk in steps:
        try:
            r = _stencil_residual(solution, X, T, hk)
        except OutOfProfileRange as exc:
            raise GridOutOfRange(str(exc)) from exc
        res.append(float(np.max(np.abs(r))))
    orders = []
    for a, b in zip(res[:-1], res[1:]):
        orders.append(math.log2(a / b) if a > 0 and b > 0 else math.nan)
    return ResidualReport(tuple(x_range), tuple(t_range), steps, res, orders)


# ---------------------------------------------------------------------------
# asymptotics


@dataclass
class Check:
    name: str
    value: float
    expected: float | None
    tol: float | None
    passed: bool

    def as_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "expected": self.expected,
                "tol": self.tol, "passed": self.passed}


@dataclass
class AsymptoticReport:
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name, value, expected=None, tol=None, passed=None):
        if passed is None:
            passed = abs(value - expected) <= tol
        self.checks.append(Check(name, float(value), expected, tol, bool(passed)))


def _aitken_tail(prof, xi_edge: float, step: float):
    """Limit and exponential rate of g from three equally spaced samples."""
    g1, g2, g3 = prof.evaluate(np.array([xi_edge, xi_edge + step, xi_edge + 2 * step]))
    d1, d2 = g2 - g1, g3 - g2
    limit = g3 - d2 * d2 / (d2 - d1)
    rate = math.log(d2 / d1) / step
    return float(limit), float(rate)


def asymptotic_check(solution: WaveSolution, tol: float = 1e-6) -> AsymptoticReport:
    """Measure the far-field limits and approach rates of a travelling wave.

    Solitons: phi(-inf), phi(+inf) equal -asin(gamma) and -asin(gamma) +- 2 pi
    (in the order fixed by the helicity), approached exponentially.
    Half-arrays: left limit -asin(gamma); on the right the gap to the
    aligned array, sampled once per array period, stays positive and
    shrinks exponentially.
    Arrays: g(xi + Xi) = g(xi) + 2 pi.
    """
    rep = AsymptoticReport()
    gam = solution.gamma
    base = -math.asin(min(gam, 1.0))
    fam = solution.family
    prof = solution.profile
    if fam is Family.CONSTANT:
        rep.add("uniform value", solution.constant_value,
                base if not solution.unstable else math.asin(gam) - math.pi, 1e-15)
        return rep
    h = solution.helicity
    if fam in (Family.SOLITON, Family.ANTISOLITON, Family.HALF_ARRAY, Family.ANTI_HALF_ARRAY):
        lt = prof.left_tail
        lim_lo, rate_lo = _aitken_tail(prof, prof.xi_lo + 0.5, 1.0 / abs(lt.rate))
        # the profile's left end is x -> -inf for h = +1 and x -> +inf for h = -1
        side = "-inf" if h > 0 else "+inf"
        rep.add(f"phi limit at x -> {side}", lim_lo - math.pi, base, tol)
        rep.add(f"approach rate at x -> {side}", rate_lo, passed=rate_lo > 0)
    if fam in (Family.SOLITON, Family.ANTISOLITON):
        rt = prof.right_tail
        lim_hi, rate_hi = _aitken_tail(prof, prof.xi_hi - 0.5, -1.0 / abs(rt.rate))
        rate_hi = -rate_hi
        side = "+inf" if h > 0 else "-inf"
        rep.add(f"phi limit at x -> {side}", lim_hi - math.pi, base + TWO_PI, tol)
        rep.add(f"approach rate at x -> {side}", rate_hi, passed=rate_hi > 0)
        jump = lim_hi - lim_lo if h > 0 else lim_lo - lim_hi
        rep.add("winding", round(jump / TWO_PI), h, 0)
    if fam in (Family.HALF_ARRAY, Family.ANTI_HALF_ARRAY):
        arr = solution.extras["array_profile"]
        # stroboscopic samples one array period apart, inside the integrated span
        xi = prof.xi_hi - solution.Xi * np.arange(int(prof.xi_hi / solution.Xi))[::-1]
        gap = prof.evaluate(xi) - arr.evaluate(xi)
        rep.add("gap to array positive", float(gap.min()), passed=bool(np.all(gap > 0)))
        rep.add("gap decreasing period to period", float(np.max(np.diff(gap))),
                passed=bool(np.all(np.diff(gap) < 0)))
        rate = -np.polyfit(xi, np.log(gap), 1)[0]
        rep.add("merge rate", rate, passed=rate > 0)
    if fam in (Family.ARRAY, Family.ANTIARRAY):
        xi = np.linspace(-3 * solution.Xi, 3 * solution.Xi, 301)
        per = prof.evaluate(xi + solution.Xi) - prof.evaluate(xi) - TWO_PI
        rep.add("linear periodicity", float(np.max(np.abs(per))), 0.0, 1e-8)
    return rep


# ---------------------------------------------------------------------------
# bound sweep


@dataclass(frozen=True)
class SweepRow:
    gamma: float
    hat_mu: float
    lower32: float
    upper32: float
    mu1: float
    sandwich: bool
    monotone: bool


def _hat_mu_cell(args):
    gamma, mu_tol = args
    return solve_hat_mu(gamma, mu_tol).mu_star


def bounds_sweep(gammas, mu_tol: float = MU_TOL, jobs: int = 1) -> list[SweepRow]:
    """mu_hat on a gamma grid in (0, 0.999] with bound and monotonicity flags.

    Rows are sorted by gamma; each cell is computed independently so the
    table does not depend on ``jobs``.
    """
    gs = sorted(float(g) for g in gammas)
    if not gs or gs[0] <= 0 or gs[-1] > 0.999:
        raise DomainError("gamma grid must lie in (0, 0.999]")
    cells = [(g, mu_tol) for g in gs]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            mus = list(pool.map(_hat_mu_cell, cells))
    else:
        mus = [_hat_mu_cell(c) for c in cells]
    rows = []
    prev = -math.inf
    for g, m in zip(gs, mus):
        lo, hi = hat_mu_bounds(g)
        rows.append(SweepRow(g, m, lo, hi, first_order_hat_mu(g), lo <= m <= hi, m > prev))
        prev = m
    return rows


# ---------------------------------------------------------------------------
# method-of-lines probe


@dataclass(frozen=True)
class StabilityProbeReport:
    amplitude: float
    horizon: float
    dx: float
    dt: float
    linf_distance: float
    velocity_estimate: float | None
    expected_velocity: float | None
    growth_rate: float | None
    energy_balance_defect: float
    deviation_history: np.ndarray


def _energy(phi_now, phi_prev, dt, dx, gamma, jump):
    ft = (phi_now - phi_prev) / dt
    mid = 0.5 * (phi_now + phi_prev)
    fx = np.diff(np.concatenate([mid, [mid[0] + jump]])) / dx if jump is not None \
        else np.diff(mid) / dx
    pot = gamma * mid - np.cos(mid)
    if jump is None:
        return float(np.sum(0.5 * ft[1:-1] ** 2 + pot[1:-1]) * dx + np.sum(0.5 * fx ** 2) * dx)
    return float(np.sum(0.5 * ft ** 2 + 0.5 * fx ** 2 + pot) * dx)


def stability_probe(solution: WaveSolution, amplitude: float = 0.0, horizon: float = 50.0,
                    dx: float = 0.05, dt: float | None = None, *, m: int = 1,
                    half_width: float = 40.0, center: float | None = None) -> StabilityProbeReport:
    """Evolve the field equation from the (perturbed) wave with leapfrog in time.

    Arrays live on a circle of m periods with the twisted condition
    phi(x + L) = phi(x) + 2 pi m n; all other waves on [c - W, c + W]
    with boundary values clamped to their initial values. The perturbation
    is a Gaussian bump of height ``amplitude`` at ``center`` added to both
    starting levels.
    """
    if dt is None:
        dt = 0.5 * dx
    if dt > dx:
        raise CFLViolation(f"dt={dt} exceeds dx={dx}")
    gam, alpha = solution.gamma, solution.alpha
    on_circle = solution.is_array
    if on_circle:
        wrap = circle_wrap(solution, m)
        n = max(8, int(math.ceil(wrap.L / dx)))
        dx = wrap.L / n
        if dt > dx:
            raise CFLViolation(f"dt={dt} exceeds dx={dx} on the circle")
        x = solution.phase_x0 + dx * np.arange(n)
        jump = wrap.jump
    else:
        c = solution.phase_x0 if center is None else center
        n = int(round(2 * half_width / dx)) + 1
        x = np.linspace(c - half_width, c + half_width, n)
        dx = x[1] - x[0]
        if dt > dx:
            raise CFLViolation(f"dt={dt} exceeds dx={dx}")
        jump = None
    xc = float(np.mean(x)) if center is None else center
    bump = amplitude * np.exp(-((x - xc) ** 2))
    prev = phi(solution, x, -dt) + bump
    now = phi(solution, x, 0.0) + bump
    steps = int(round(horizon / dt))
    k1 = 1.0 + 0.5 * alpha * dt
    k2 = 1.0 - 0.5 * alpha * dt
    e0 = _energy(now, prev, dt, dx, gam, jump)
    dissipated = 0.0
    track_t, track_x, dev = [], [], []
    mid_level = -math.asin(min(gam, 1.0)) + math.pi
    for step in range(steps):
        if on_circle:
            left = np.concatenate([[now[-1] - jump], now[:-1]])
            right = np.concatenate([now[1:], [now[0] + jump]])
            lap = (left - 2.0 * now + right) / (dx * dx)
        else:
            lap = np.zeros_like(now)
            lap[1:-1] = (now[:-2] - 2.0 * now[1:-1] + now[2:]) / (dx * dx)
        new = (2.0 * now - k2 * prev + dt * dt * (lap - np.sin(now) - gam)) / k1
        if not on_circle:
            new[0], new[-1] = now[0], now[-1]
        ft = (new - prev) / (2.0 * dt)
        weight = ft[1:-1] if not on_circle else ft
        dissipated += alpha * float(np.sum(weight ** 2)) * dx * dt
        prev, now = now, new
        t_now = (step + 1) * dt
        if solution.profile is not None:
            pos = _level_crossing(x, now, mid_level, solution.helicity)
            if pos is not None:
                track_t.append(t_now)
                track_x.append(pos)
        else:
            dev.append(float(np.max(np.abs(now - solution.constant_value))))
    t_end = steps * dt
    e1 = _energy(now, prev, dt, dx, gam, jump)
    ref = phi(solution, x, t_end)
    if solution.profile is None:
        linf = float(np.max(np.abs(now - solution.constant_value)))
        dev_arr = np.asarray(dev)
        tt = dt * np.arange(1, steps + 1)
        # fit the linear regime: past the transient, before saturation
        growth = None
        sel = (dev_arr > 0) & (dev_arr < 0.1) & (tt >= 0.25 * t_end)
        if np.count_nonzero(sel) > 10:
            growth = float(np.polyfit(tt[sel], np.log(dev_arr[sel]), 1)[0])
        return StabilityProbeReport(amplitude, t_end, dx, dt, linf, None, 0.0, growth,
                                    e1 - e0 + dissipated, dev_arr)
    linf = float(np.max(np.abs(now - ref)))
    vel = None
    if len(track_t) > 10:
        tt = np.asarray(track_t)
        xx = (np.unwrap(np.asarray(track_x), period=solution.X) if on_circle
              else np.asarray(track_x))
        late = tt >= 0.5 * t_end
        if np.count_nonzero(late) > 2:
            vel = float(np.polyfit(tt[late], xx[late], 1)[0])
    return StabilityProbeReport(amplitude, t_end, dx, dt, linf, vel, solution.v, None,
                                e1 - e0 + dissipated, np.asarray(track_x))


def _level_crossing(x: np.ndarray, f: np.ndarray, level: float, helicity: int):
    """First x where f passes ``level`` modulo 2 pi (upward for helicity +1).

    Linear interpolation between grid points.
    """
    d = (f - level) * helicity / TWO_PI
    branch = np.floor(d)
    idx = np.nonzero(branch[1:] > branch[:-1])[0]
    if idx.size == 0:
        return None
    i = idx[0]
    target = branch[i + 1]
    return float(x[i] + (x[i + 1] - x[i]) * (target - d[i]) / (d[i + 1] - d[i]))


# ---------------------------------------------------------------------------
# randomized phase-flow properties


@dataclass(frozen=True)
class PropertyOutcome:
    name: str
    trials: int
    failures: int
    worst: float

    @property
    def passed(self) -> bool:
        return self.failures == 0


def _common_grid(c1, c2, n: int = 200, margin: float = 1e-3):
    lo, hi = max(c1.g_lo, c2.g_lo) + margin, min(c1.g_hi, c2.g_hi) - margin
    if hi <= lo:
        return None
    return np.linspace(lo, hi, n)


def check_energy_ordering(gamma, mu, g0, z_lo, z_hi, span=2 * TWO_PI) -> float:
    """Smallest z_hi(g) - z_lo(g) over the common domain of the forward curves.

    Both curves start at g0, with energies z_hi > z_lo. The ordering also
    requires the higher curve to reach at least as far.
    """
    from .phaseflow import integrate_z
    from .washboard import SystemParams

    p = SystemParams(gamma=gamma, mu=mu)
    c_hi = integrate_z(g0, z_hi, p, 1, span, snap=False, separatrix=False)
    c_lo = integrate_z(g0, z_lo, p, 1, span, snap=False, separatrix=False)
    g = _common_grid(c_hi, c_lo)
    margin = np.inf if g is None else float(np.min(c_hi.z(g) - c_lo.z(g)))
    if c_hi.g_hi < c_lo.g_hi - 1e-9:
        return -abs(c_lo.g_hi - c_hi.g_hi)
    return margin


def check_velocity_ordering(g0, z0, gamma1, mu1, gamma2, mu2, span=TWO_PI) -> float:
    """Smallest signed gap between the velocities of the (gamma1, mu1) and (gamma2, mu2) curves.

    Both start at (g0, z0) with eps = +1. Forward in g the first must be
    faster; backward it must be slower. Returns the minimum of
    u1 - u2 ahead and u2 - u1 behind.
    """
    from .phaseflow import integrate_z
    from .washboard import SystemParams

    p1 = SystemParams(gamma=gamma1, mu=mu1)
    p2 = SystemParams(gamma=gamma2, mu=mu2)
    worst = np.inf
    for direction in (1, -1):
        c1 = integrate_z(g0, z0, p1, direction, span, snap=False, separatrix=False)
        c2 = integrate_z(g0, z0, p2, direction, span, snap=False, separatrix=False)
        g = _common_grid(c1, c2)
        if g is None:
            continue
        g = g[np.abs(g - g0) > 1e-3]
        d = np.sqrt(2.0 * c1.z(g)) - np.sqrt(2.0 * c2.z(g))
        worst = min(worst, float(np.min(direction * d)))
    return worst


def check_step_relation(gamma, mu, g0, z0, epsilon, periods=3) -> tuple[float, np.ndarray]:
    """Worst residual of the per-period energy step and the steps themselves."""
    from .phaseflow import integrate_z, step_differences, step_relation_check
    from .washboard import SystemParams

    p = SystemParams(gamma=gamma, mu=mu, epsilon=epsilon)
    c = integrate_z(g0, z0, p, 1, periods * TWO_PI, snap=False, separatrix=False)
    res = step_relation_check(c, g0)
    return float(np.max(np.abs(res))), step_differences(c, g0)


def property_suite(n: int = 100, seed: int = 0) -> list[PropertyOutcome]:
    """Run the three phase-flow properties on ``n`` random parameter sets each.

    1. energy ordering in z0, 2. velocity ordering in (mu, -gamma),
    3. per-period step relation with growing steps on the eps = -1 branch.
    """
    rng = np.random.default_rng(seed)
    out = []

    fails, worst = 0, np.inf
    for _ in range(n):
        gamma = rng.uniform(0.0, 0.95)
        mu = rng.uniform(0.0, 1.5)
        g0 = rng.uniform(-math.pi, math.pi)
        z_lo = rng.uniform(0.0, 2.0)
        z_hi = z_lo + rng.uniform(0.05, 2.0)
        m = check_energy_ordering(gamma, mu, g0, z_lo, z_hi)
        worst = min(worst, m)
        fails += not m > 0
    out.append(PropertyOutcome("energy ordering in z0", n, fails, worst))

    fails, worst = 0, np.inf
    for _ in range(n):
        g0 = rng.uniform(-math.pi, math.pi)
        z0 = rng.uniform(0.5, 3.0)
        gamma1 = rng.uniform(0.0, 0.95)
        mu1 = rng.uniform(0.0, 1.0)
        gamma2 = gamma1 - rng.uniform(0.0, 0.2) * rng.integers(0, 2)
        mu2 = mu1 + rng.uniform(0.05, 0.5)
        gamma2 = max(gamma2, 0.0)
        m = check_velocity_ordering(g0, z0, gamma1, mu1, gamma2, mu2)
        worst = min(worst, m)
        fails += not m > 0
    out.append(PropertyOutcome("velocity ordering in (mu, -gamma)", n, fails, worst))

    fails, worst = 0, 0.0
    for _ in range(n):
        gamma = rng.uniform(0.05, 0.95)
        mu = rng.uniform(0.05, 1.0)
        g0 = rng.uniform(-math.pi, math.pi)
        # above the potential swing of 2 the backward branch cannot stall
        z0 = rng.uniform(2.05, 4.0)
        r, steps = check_step_relation(gamma, mu, g0, z0, -1)
        worst = max(worst, r)
        growing = bool(np.all(steps > TWO_PI * gamma) and np.all(np.diff(steps) > 0))
        fails += not (r <= 1e-8 and growing)
    out.append(PropertyOutcome("step relation, eps = -1", n, fails, worst))
    return out
