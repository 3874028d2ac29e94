"""Washboard potential U(g) = -(cos g + gamma g) and the singular points of

    g' = u,    u' = -mu u - sin g + gamma.

Angles are unwrapped radians throughout; nothing is reduced mod 2 pi.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

import numpy as np

from .errors import DomainError, GammaOutOfRange, NoSingularPoints

GAMMA_ONE_TOL = 1e-14


def is_gamma_one(gamma: float) -> bool:
    return abs(gamma - 1.0) <= GAMMA_ONE_TOL


@dataclass(frozen=True)
class SystemParams:
    """Physical and reduced parameters of one travelling wave.

    ``alpha`` and ``v`` are optional: the reduced problem only sees
    ``gamma``, ``mu`` and the branch sign ``epsilon``.
    """

    gamma: float
    mu: float
    epsilon: int = 1
    alpha: float | None = None
    v: float | None = None

    def __post_init__(self):
        if self.gamma < 0:
            raise GammaOutOfRange(f"gamma must be >= 0, got {self.gamma}")
        if self.mu < 0:
            raise DomainError(f"mu must be >= 0, got {self.mu}")
        if self.epsilon not in (1, -1):
            raise DomainError(f"epsilon must be +1 or -1, got {self.epsilon}")
        if self.alpha is not None and self.alpha < 0:
            raise DomainError(f"alpha must be >= 0, got {self.alpha}")
        if self.v is not None and self.alpha is not None:
            av = abs(self.v)
            if 0 < av < 1 and self.alpha > 0:
                expected = self.alpha / math.sqrt(1.0 / av**2 - 1.0)
                if abs(expected - self.mu) > 1e-12 * max(1.0, expected):
                    raise DomainError(
                        f"mu={self.mu} inconsistent with alpha={self.alpha}, v={self.v}"
                    )

    @classmethod
    def from_velocity(cls, alpha: float, gamma: float, v: float, epsilon: int = 1):
        av = abs(v)
        if not 0 < av < 1:
            raise DomainError("from_velocity needs 0 < |v| < 1")
        mu = alpha / math.sqrt(1.0 / av**2 - 1.0)
        return cls(gamma=gamma, mu=mu, epsilon=epsilon, alpha=alpha, v=v)

    def with_mu(self, mu: float) -> "SystemParams":
        return SystemParams(gamma=self.gamma, mu=mu, epsilon=self.epsilon)

    def with_epsilon(self, epsilon: int) -> "SystemParams":
        return SystemParams(gamma=self.gamma, mu=self.mu, epsilon=epsilon,
                            alpha=self.alpha, v=self.v)


class PointKind(str, Enum):
    MINIMUM = "minimum"
    MAXIMUM = "maximum"
    INFLECTION = "inflection"


class Classification(str, Enum):
    SADDLE = "saddle"
    NODE = "node"
    FOCUS = "focus"
    CENTER = "center"
    SADDLE_NODE = "saddle-node"


@dataclass(frozen=True)
class CriticalPoint:
    location: float
    index: int
    kind: PointKind


@dataclass(frozen=True)
class SingularPointReport:
    point: CriticalPoint
    classification: Classification
    eigenvalues: tuple[complex, complex]


def _scalar_or_array(x: np.ndarray):
    return float(x) if x.ndim == 0 else x


def potential(g, gamma: float):
    """U(g) = -(cos g + gamma g). Works on scalars and arrays."""
    g = np.asarray(g, dtype=float)
    return _scalar_or_array(-(np.cos(g) + gamma * g))


def potential_derivative(g, gamma: float):
    """U_g(g) = sin g - gamma."""
    g = np.asarray(g, dtype=float)
    return _scalar_or_array(np.sin(g) - gamma)


def g_min(k: int, gamma: float) -> float:
    """Location of the k-th local minimum of U (requires gamma < 1)."""
    return math.asin(gamma) + 2 * k * math.pi


def g_max(k: int, gamma: float) -> float:
    """Location of the k-th local maximum of U (requires gamma < 1)."""
    return -math.asin(gamma) + (2 * k + 1) * math.pi


def critical_points(gamma: float, k_range: Iterable[int] | tuple[int, int]) -> list[CriticalPoint]:
    """Critical points of U with lattice index in ``k_range``.

    ``k_range`` is either an iterable of indices or an inclusive pair
    ``(k_lo, k_hi)``. Returns minima and maxima for gamma < 1, inflections
    for gamma == 1 and nothing for gamma > 1, sorted by location.
    """
    if isinstance(k_range, tuple) and len(k_range) == 2:
        ks = range(k_range[0], k_range[1] + 1)
    else:
        ks = list(k_range)
    points: list[CriticalPoint] = []
    if is_gamma_one(gamma):
        for k in ks:
            points.append(CriticalPoint((2 * k + 0.5) * math.pi, k, PointKind.INFLECTION))
    elif gamma < 1:
        for k in ks:
            points.append(CriticalPoint(g_min(k, gamma), k, PointKind.MINIMUM))
            points.append(CriticalPoint(g_max(k, gamma), k, PointKind.MAXIMUM))
    points.sort(key=lambda p: p.location)
    return points


def _char_roots(mu: float, const: float) -> tuple[complex, complex]:
    # roots of lam^2 + mu lam + const = 0
    disc = complex(mu * mu - 4.0 * const)
    root = disc ** 0.5
    l1 = (-mu + root) / 2
    l2 = (-mu - root) / 2
    return l1, l2


def classify_singular_point(point: CriticalPoint, mu: float, gamma: float) -> SingularPointReport:
    """Linearized type of the singular point (point.location, 0).

    Characteristic equation: lam^2 + mu lam -/+ sqrt(1 - gamma^2) = 0 with
    the upper sign at maxima of U and the lower sign at minima.
    """
    if gamma > 1 and not is_gamma_one(gamma):
        raise NoSingularPoints(f"no singular points for gamma={gamma} > 1")
    c = math.sqrt(max(0.0, 1.0 - gamma * gamma))
    if point.kind is PointKind.INFLECTION or is_gamma_one(gamma):
        eig = _char_roots(mu, 0.0)
        return SingularPointReport(point, Classification.SADDLE_NODE, eig)
    if point.kind is PointKind.MAXIMUM:
        return SingularPointReport(point, Classification.SADDLE, _char_roots(mu, -c))
    eig = _char_roots(mu, c)
    if mu == 0:
        kind = Classification.CENTER
    elif mu >= 2.0 * c ** 0.5:
        kind = Classification.NODE
    else:
        kind = Classification.FOCUS
    return SingularPointReport(point, kind, eig)


def separatrix_slopes(mu: float, gamma: float) -> dict[tuple[int, int], float]:
    """Slopes u_{e'e} = (e' mu + e sqrt(mu^2 + 4 sqrt(1-gamma^2))) / 2.

    Near a saddle g_s the four separatrices behave like
    u ~ (g_s - g) u_{+e} from the left and u ~ (g - g_s) u_{-e} from the right.
    Keys are ``(e', e)`` with entries in {+1, -1}.
    """
    if gamma >= 1:
        raise GammaOutOfRange("separatrix slopes need gamma < 1")
    root = math.sqrt(mu * mu + 4.0 * math.sqrt(1.0 - gamma * gamma))
    return {(ep, e): 0.5 * (ep * mu + e * root) for ep in (1, -1) for e in (1, -1)}


def saddle_locations(gamma: float, g_lo: float, g_hi: float) -> np.ndarray:
    """All maxima g_k^M (or inflections when gamma == 1) inside [g_lo, g_hi]."""
    if gamma > 1 and not is_gamma_one(gamma):
        return np.empty(0)
    base = math.pi / 2 if is_gamma_one(gamma) else g_max(0, gamma)
    k_lo = math.ceil((g_lo - base) / (2 * math.pi))
    k_hi = math.floor((g_hi - base) / (2 * math.pi))
    return base + 2 * math.pi * np.arange(k_lo, k_hi + 1)


def launch_point(gamma: float, k: int = 0) -> float:
    """Reference point of period k for periodic shooting.

    g_k^M for gamma < 1 and (2k + 1/2) pi for gamma >= 1, where sin g = 1;
    the two agree at gamma = 1.
    """
    if gamma < 1 and not is_gamma_one(gamma):
        return g_max(k, gamma)
    return (2 * k + 0.5) * math.pi
