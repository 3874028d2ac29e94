"""Successive approximations for the soliton kinetic energy.

On y in [0, 2 pi] (g = g0 + y with g0 = -asin(gamma) - pi, a maximum of U)
the soliton energy z is the fixed point of

    A z(y) = c 2 sin^2(y/2) + gamma (y - sin y) - mu(z) int_0^y sqrt(2 z),
    mu(z)  = 2 pi gamma / int_0^{2 pi} sqrt(2 z),           c = sqrt(1 - gamma^2),

where mu(z) is re-tuned at every step so that A z vanishes at both ends.
Distances use the weighted norm ||z|| = sup |2 z(y) / sin^2(y/2)|, which
controls the quadratic vanishing of z at the two saddles.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DegenerateIterate, GridMismatch, MaxIterExceeded, NotContractive
from .washboard import potential

TWO_PI = 2.0 * math.pi
N_GRID = 2048
DEGENERATE_INTEGRAL = 1e-14


@dataclass(frozen=True, eq=False)
class WeightedGridFunction:
    """Samples of a function on a uniform grid of [0, 2 pi] with weight p(y) = sin(y/2)."""

    y_grid: np.ndarray
    values: np.ndarray

    @classmethod
    def from_callable(cls, f: Callable, n: int = N_GRID) -> "WeightedGridFunction":
        y = np.linspace(0.0, TWO_PI, n + 1)
        return cls(y, np.asarray(f(y), dtype=float))

    @property
    def n(self) -> int:
        return self.y_grid.size - 1

    def ratio(self) -> np.ndarray:
        """2 z / p^2 on all nodes, endpoint values by quadratic extrapolation."""
        return _weighted_ratio(self.y_grid, self.values)

    def in_box(self, a: float, b: float, tol: float = 0.0) -> bool:
        """Whether a^2 <= 2 z / p^2 <= b^2 at every interior node."""
        r = self.ratio()[1:-1]
        return bool(np.all(r >= a * a - tol) and np.all(r <= b * b + tol))

    def sqrt_integral(self) -> np.ndarray:
        """Cumulative int_0^y sqrt(2 z)."""
        return cumulative_integral(np.sqrt(2.0 * np.maximum(self.values, 0.0)), self.y_grid)


def _stencil_weights() -> np.ndarray:
    # W[k, j] = int_k^{k+1} L_j(t) dt for the quartic Lagrange basis on nodes 0..4
    t = np.arange(5.0)
    w = np.empty((4, 5))
    for j in range(5):
        basis = np.polynomial.Polynomial.fit(t, np.eye(5)[j], 4, domain=[0, 4], window=[0, 4])
        anti = basis.integ()
        w[:, j] = anti(t[1:]) - anti(t[:-1])
    return w


_WEIGHTS = _stencil_weights()


def cumulative_integral(f: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Cumulative int_{y_0}^{y_i} f on a uniform grid, starting at 0.

    Each cell is integrated with the quartic through the five nearest nodes,
    so every node (not only every other one) carries an O(h^5) local error.
    """
    n = f.size - 1
    if n < 4:
        raise ValueError("need at least 5 grid nodes")
    h = (y[-1] - y[0]) / n
    i = np.arange(n)
    start = np.clip(i - 2, 0, n - 4)
    idx = start[:, None] + np.arange(5)
    cells = h * np.einsum("ij,ij->i", _WEIGHTS[i - start], f[idx])
    return np.concatenate(([0.0], np.cumsum(cells)))


def _weighted_ratio(y: np.ndarray, values: np.ndarray) -> np.ndarray:
    out = np.empty_like(values)
    p2 = _sin_half(y[1:-1]) ** 2
    out[1:-1] = 2.0 * values[1:-1] / p2
    # 0/0 at both ends: extrapolate the interior ratio quadratically
    out[0] = 3.0 * out[1] - 3.0 * out[2] + out[3]
    out[-1] = 3.0 * out[-2] - 3.0 * out[-3] + out[-4]
    return out


def _check_grid(z1: WeightedGridFunction, z2: WeightedGridFunction):
    if z1.y_grid.shape != z2.y_grid.shape or not np.array_equal(z1.y_grid, z2.y_grid):
        raise GridMismatch("weighted functions live on different grids")


def weighted_distance(z1: WeightedGridFunction, z2: WeightedGridFunction) -> float:
    """sup |2 (z1 - z2) / sin^2(y/2)| over the grid."""
    _check_grid(z1, z2)
    return float(np.max(np.abs(_weighted_ratio(z1.y_grid, z1.values - z2.values))))


def start_function(n: int = N_GRID) -> WeightedGridFunction:
    """Unperturbed soliton energy z_0(y) = 2 sin^2(y/2)."""
    return WeightedGridFunction.from_callable(_start_values, n)


def _sin_half(y: np.ndarray) -> np.ndarray:
    """sin(y/2) evaluated from the nearer endpoint to keep relative accuracy."""
    return np.where(y <= math.pi, np.sin(0.5 * y), np.sin(0.5 * (TWO_PI - y)))


def _start_values(y: np.ndarray) -> np.ndarray:
    return 2.0 * _sin_half(y) ** 2


def _forcing_left(y: np.ndarray, gamma: float) -> np.ndarray:
    c = math.sqrt(max(0.0, 1.0 - gamma * gamma))
    return c * 2.0 * np.sin(0.5 * y) ** 2 + gamma * (y - np.sin(y))


def _forcing_right(s: np.ndarray, gamma: float) -> np.ndarray:
    # forcing(2 pi - s) - 2 pi gamma, written in s so it vanishes like s^2 without cancellation
    c = math.sqrt(max(0.0, 1.0 - gamma * gamma))
    return c * 2.0 * np.sin(0.5 * s) ** 2 - gamma * (s - np.sin(s))


def tuned_mu(z: WeightedGridFunction, gamma: float) -> float:
    """mu(z) = 2 pi gamma / int_0^{2 pi} sqrt(2 z)."""
    total = float(z.sqrt_integral()[-1])
    if total < DEGENERATE_INTEGRAL:
        raise DegenerateIterate(f"int sqrt(2 z) = {total} is too small")
    return TWO_PI * gamma / total


def apply_operator(z: WeightedGridFunction, gamma: float) -> tuple[WeightedGridFunction, float]:
    """One application of the re-tuned operator; returns (A z, mu(z)).

    The left half of the grid is evaluated as forcing - mu int_0^y, the right
    half through the equivalent form in s = 2 pi - y with the tail integral
    int_y^{2 pi}, so that A z keeps full relative accuracy where it vanishes
    at either end.
    """
    if np.any(z.values < 0):
        raise DegenerateIterate("iterate has negative values")
    y = z.y_grid
    w = np.sqrt(2.0 * z.values)
    head = cumulative_integral(w, y)
    tail = cumulative_integral(w[::-1], y)[::-1]
    total = float(head[-1])
    if total < DEGENERATE_INTEGRAL:
        raise DegenerateIterate(f"int sqrt(2 z) = {total} is too small")
    mu = TWO_PI * gamma / total
    left = y <= math.pi
    vals = np.empty_like(y)
    vals[left] = _forcing_left(y[left], gamma) - mu * head[left]
    s = (TWO_PI - y[~left])
    vals[~left] = _forcing_right(s, gamma) + mu * tail[~left]
    vals[0] = 0.0
    vals[-1] = 0.0
    return WeightedGridFunction(y, vals), mu


def classical_operator(z: WeightedGridFunction, gamma: float, mu: float,
                       g0: float | None = None) -> WeightedGridFunction:
    """Volterra map with fixed mu: z(0) + U(g0) - U(g0 + y) - mu int_0^y sqrt(2 z)."""
    if g0 is None:
        g0 = -math.asin(min(gamma, 1.0)) - math.pi
    y = z.y_grid
    vals = (z.values[0] + potential(g0, gamma) - potential(g0 + y, gamma)
            - mu * z.sqrt_integral())
    return WeightedGridFunction(y, vals)


@dataclass(frozen=True)
class ContractionConstants:
    a: float
    b: float
    lam: float
    box_valid: bool
    contraction_valid: bool


BOX_GAMMA_MAX = (1.0 + 25.0 * math.pi ** 2 / 9.0) ** -0.5
CONTRACTION_GAMMA_MAX = (1.0 + (1.75 * math.pi) ** 2) ** -0.5


def contraction_constants(gamma: float) -> ContractionConstants:
    """Box constants a, b and contraction factor lambda.

    a^2 = 4 (c - pi gamma), b^2 = 4 (c + pi gamma), lambda = (1 + b/a) pi gamma / a^2.
    ``box_valid`` requires a^2 > 0 and a/b >= 1/2; ``contraction_valid``
    requires in addition lambda < 1. Invalid boxes report nan for a, lambda.
    """
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    c = math.sqrt(max(0.0, 1.0 - gamma * gamma))
    a2 = 4.0 * (c - math.pi * gamma)
    b = 2.0 * math.sqrt(c + math.pi * gamma)
    if a2 <= 0:
        return ContractionConstants(math.nan, b, math.nan, False, False)
    a = math.sqrt(a2)
    lam = (1.0 + b / a) * math.pi * gamma / a2
    box = 2.0 * a >= b
    return ContractionConstants(a, b, lam, box, box and lam < 1.0)


def mu_error_bound(gamma: float, lam: float, n: int, d01: float) -> float:
    """A-priori bound (pi gamma/32)(c - pi gamma)^(-3/2) lambda^n / (1 - lambda) ||z1 - z0||."""
    c = math.sqrt(max(0.0, 1.0 - gamma * gamma))
    return (math.pi * gamma / 32.0) * (c - math.pi * gamma) ** -1.5 * lam ** n / (1.0 - lam) * d01


@dataclass(eq=False)
class FixedPointRun:
    """State of one successive-approximation run.

    ``iterates[n]`` is z_(n); ``mu_sequence[n]`` is mu(z_(n)), so
    ``mu_sequence[0]`` = pi gamma / 4 is the first approximation mu_1.
    ``ratios`` are ||z_(n+1) - z_(n)|| / ||z_(n) - z_(n-1)||.
    """

    gamma: float
    constants: ContractionConstants
    iterates: list[WeightedGridFunction] = field(default_factory=list)
    mu_sequence: list[float] = field(default_factory=list)
    steps: list[float] = field(default_factory=list)
    forced: bool = False
    converged: bool = False

    @property
    def a(self) -> float:
        return self.constants.a

    @property
    def b(self) -> float:
        return self.constants.b

    @property
    def lam(self) -> float:
        return self.constants.lam

    @property
    def iterations(self) -> int:
        return len(self.iterates) - 1

    @property
    def mu_hat(self) -> float:
        return self.mu_sequence[-1]

    @property
    def z_hat(self) -> WeightedGridFunction:
        return self.iterates[-1]

    @property
    def ratios(self) -> np.ndarray:
        s = np.asarray(self.steps)
        ok = s[:-1] > 0
        return s[1:][ok] / s[:-1][ok]

    @property
    def apriori_error_z(self) -> float:
        if not self.constants.contraction_valid or not self.steps:
            return math.inf
        lam = self.lam
        return lam ** self.iterations / (1.0 - lam) * self.steps[0]

    @property
    def apriori_error_mu(self) -> float:
        """Bound on |mu_n - mu_hat| for the last reported mu (index n = len(mu_sequence))."""
        if not self.constants.contraction_valid or not self.steps:
            return math.inf
        return mu_error_bound(self.gamma, self.lam, len(self.mu_sequence), self.steps[0])

    @property
    def aposteriori_error_z(self) -> float:
        if not self.constants.contraction_valid or not self.steps:
            return math.inf
        return self.lam / (1.0 - self.lam) * self.steps[-1]


def iterate_to_fixed_point(gamma: float, tol: float = 1e-13, max_iter: int = 200, *,
                           force: bool = False, n: int = N_GRID) -> FixedPointRun:
    """Iterate z_(n+1) = A z_(n) from z_(0) = 2 sin^2(y/2).

    Stops once lambda/(1 - lambda) ||z_(n) - z_(n-1)|| <= tol. With
    ``force`` the iteration is also attempted outside the proven range and
    stops once ||z_(n) - z_(n-1)|| <= tol.

    Raises
    ------
    NotContractive
        lambda >= 1 (or the box is empty) and ``force`` is False.
    MaxIterExceeded
        Tolerance not met within ``max_iter`` steps.
    """
    const = contraction_constants(gamma)
    if not const.contraction_valid and not force:
        raise NotContractive(
            f"gamma={gamma} outside the proven range (lambda={const.lam}); pass force=True")
    run = FixedPointRun(gamma=gamma, constants=const, forced=not const.contraction_valid)
    z = start_function(n)
    run.iterates.append(z)
    factor = const.lam / (1.0 - const.lam) if const.contraction_valid else 1.0
    for _ in range(max_iter):
        z_next, mu = apply_operator(z, gamma)
        run.mu_sequence.append(mu)
        step = weighted_distance(z_next, z)
        run.steps.append(step)
        run.iterates.append(z_next)
        z = z_next
        if factor * step <= tol:
            run.converged = True
            break
    else:
        raise MaxIterExceeded(f"no convergence in {max_iter} iterations (last step {step})")
    run.mu_sequence.append(tuned_mu(z, gamma))
    return run


@dataclass(frozen=True)
class FirstApproximation:
    gamma: float
    alpha: float
    mu1: float
    v1: float

    def z1(self, y):
        y = np.asarray(y, dtype=float)
        c = math.sqrt(max(0.0, 1.0 - self.gamma ** 2))
        return (c * 2.0 * np.sin(0.5 * y) ** 2
                + self.gamma * (math.pi * (np.cos(0.5 * y) - 1.0) + y - np.sin(y)))

    def e1(self, y):
        """Total energy along z1, fixed so that e1(0) equals U at the launch maximum."""
        y = np.asarray(y, dtype=float)
        g0 = -math.asin(self.gamma) - math.pi
        return self.gamma * math.pi * (np.cos(0.5 * y) - 1.0) + potential(g0, self.gamma)


def first_velocity(gamma: float, alpha: float) -> float:
    """v1 = [1 + (4 alpha / (pi gamma))^2]^(-1/2), continuous at gamma = 0 with v1 = 0."""
    if gamma == 0:
        return 0.0
    return 1.0 / math.sqrt(1.0 + (4.0 * alpha / (math.pi * gamma)) ** 2)


def first_approximation(gamma: float, alpha: float = 1.0) -> FirstApproximation:
    """Closed-form first iterate: z1, mu1 = pi gamma / 4, e1 and the velocity v1."""
    return FirstApproximation(gamma=gamma, alpha=alpha, mu1=math.pi * gamma / 4.0,
                              v1=first_velocity(gamma, alpha))


def tricomi_condition(z0: WeightedGridFunction, z1: WeightedGridFunction,
                      mu: float) -> tuple[bool, float, float]:
    """Classical sufficient condition for the fixed-mu iteration.

    eps1 = sup |z1 - z0|, eta1 = min |z1|; holds when eta1 > eps1 and
    mu < (sqrt(eta1) - sqrt(eps1))^2 / (2 pi sqrt 2).
    """
    _check_grid(z0, z1)
    eps1 = float(np.max(np.abs(z1.values - z0.values)))
    eta1 = float(np.min(np.abs(z1.values)))
    ok = eta1 > eps1 and mu < (math.sqrt(eta1) - math.sqrt(eps1)) ** 2 / (TWO_PI * math.sqrt(2.0))
    return bool(ok), eps1, eta1
