"""Maximum alpha-fair utility (alpha >= 1) under a throughput constraint.

Above ``theta_n`` the optimum keeps every user active: ``n - 1`` users contend
with a small probability ``p_s`` and one with the large ``p_l = 1 - (n-1) p_s``.
At or below ``theta_n`` all users receive the equal rate ``theta / n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._parallel import ordered_map
from .constraint import bisect_decreasing, equal_rate_control, restricted_throughput, solve_ps
from .errors import DomainError
from .grid import Grid
from .model import (
    ControlVector,
    Regime,
    RestrictedControl,
    alpha_objective,
    check_n,
    check_theta,
    critical_throughput,
    rates_from_control,
)

CSV_COLUMNS = ("theta", "alpha", "F_star", "regime", "p_s", "p_l", "x_s", "x_l")
INFLECTION_FIELDS = ("alpha", "n", "p_ring_s", "theta_ring", "p_s_minus")

PS_UNDERFLOW = 1e-12
INFLECTION_EDGE = 1e-12
INFLECTION_TOL = 1e-12
INFLECTION_SCAN = 64


def check_alpha(alpha: float) -> float:
    if not (isinstance(alpha, (int, float)) and math.isfinite(alpha) and alpha >= 1.0):
        raise DomainError("alpha must be >= 1")
    return float(alpha)


@dataclass(frozen=True)
class AlphaTradeoffPoint:
    """Optimal alpha-fair utility at one target throughput.

    ``flagged`` marks points whose small probability underflowed below
    ``PS_UNDERFLOW``; their ``F_star`` is reported as ``-inf``.
    ``realized_theta`` differs from ``theta`` only for the inequality variant
    below ``theta_n``, where the uniform control overshoots the target.
    """

    theta: float
    alpha: float
    n: int
    F_star: float
    regime: Regime
    p_s: float
    p_l: float
    x_s: float
    x_l: float
    realized_theta: float
    flagged: bool = False

    @property
    def k(self) -> int:
        return self.n if self.regime is Regime.EQUAL_RATE else self.n - 1

    @property
    def n_prime(self) -> int:
        return self.n

    @property
    def control(self) -> ControlVector:
        if self.regime is Regime.EQUAL_RATE:
            return ControlVector([self.p_s] * self.n)
        return ControlVector([self.p_s] * (self.n - 1) + [self.p_l])

    @property
    def restricted(self) -> RestrictedControl | None:
        if self.regime is Regime.EQUAL_RATE:
            return None
        return RestrictedControl(self.p_s, self.n - 1, self.n, self.n)

    def row(self) -> dict:
        return {c: getattr(self, c) for c in CSV_COLUMNS}


def equal_rate_utility(theta: float, alpha: float, n: int) -> float:
    """Utility of ``n`` users each at rate ``theta / n``."""
    if alpha == 1.0:
        return -n * math.log(n / theta)
    return -n / (alpha - 1.0) * (n / theta) ** (alpha - 1.0)


def _equal_rate_point(theta: float, alpha: float, n: int) -> AlphaTradeoffPoint:
    p = equal_rate_control(theta, n)
    x = theta / n
    return AlphaTradeoffPoint(theta, alpha, n, equal_rate_utility(theta, alpha, n),
                              Regime.EQUAL_RATE, p, p, x, x, theta)


def _two_value_point(theta: float, alpha: float, n: int) -> AlphaTradeoffPoint:
    p_s = solve_ps(theta, n - 1, n)
    rc = RestrictedControl(p_s, n - 1, n, n)
    if p_s < PS_UNDERFLOW:
        return AlphaTradeoffPoint(theta, alpha, n, -math.inf, Regime.TWO_VALUE, p_s,
                                  rc.p_l, rc.x_s, rc.x_l, theta, flagged=True)
    F = alpha_objective(rates_from_control(rc.control()), alpha)
    return AlphaTradeoffPoint(theta, alpha, n, F, Regime.TWO_VALUE, p_s, rc.p_l,
                              rc.x_s, rc.x_l, theta)


def alpha_optimal_point(theta: float, alpha: float, n: int) -> AlphaTradeoffPoint:
    """Maximize the alpha-fair utility subject to ``T(x(p)) = theta``."""
    theta = check_theta(theta)
    alpha = check_alpha(alpha)
    n = check_n(n)
    if theta <= critical_throughput(n):
        return _equal_rate_point(theta, alpha, n)
    return _two_value_point(theta, alpha, n)


def alpha_optimal_point_inequality(theta: float, alpha: float, n: int) -> AlphaTradeoffPoint:
    """Maximize the alpha-fair utility subject to ``T(x(p)) >= theta``.

    At or below ``theta_n`` the uniform control ``1/n`` is optimal whatever
    the target, so the utility is flat there.
    """
    theta = check_theta(theta)
    alpha = check_alpha(alpha)
    n = check_n(n)
    theta_n = critical_throughput(n)
    if theta > theta_n:
        return _two_value_point(theta, alpha, n)
    p = 1.0 / n
    x = theta_n / n
    return AlphaTradeoffPoint(theta, alpha, n, equal_rate_utility(theta_n, alpha, n),
                              Regime.EQUAL_RATE, p, p, x, x, theta_n)


def alpha_curve(alpha: float, n: int, grid: Grid, inject=()) -> tuple:
    """Equality-constrained optimum at every grid value, in increasing ``theta``."""
    alpha = check_alpha(alpha)
    n = check_n(n)
    if grid.lo <= 0.0 or grid.hi > 1.0:
        raise DomainError("grid must lie within (0, 1)")
    thetas = grid.points(inject=inject)
    return tuple(ordered_map(lambda th: alpha_optimal_point(th, alpha, n), thetas))


@dataclass(frozen=True)
class InflectionResult:
    """Where the curve switches from convex (low ``theta``) to concave (high ``theta``)."""

    alpha: float
    n: int
    p_ring_s: float
    theta_ring: float
    p_s_minus: float

    def to_dict(self) -> dict:
        return {f: getattr(self, f) for f in INFLECTION_FIELDS}


@dataclass(frozen=True)
class AlwaysConcave:
    alpha: float
    n: int

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "n": self.n, "result": "always-concave"}


def p_s_minus(alpha: float, n: int) -> float:
    """Smaller root of ``1 - p = alpha (n p - 2)(n p - 1)``."""
    an = alpha * n
    return (3.0 * an - 1.0 - math.sqrt(an * (an + 4.0 * n - 6.0) + 1.0)) / (2.0 * an * n)


def inflection_residual(p: float, alpha: float, n: int) -> float:
    """Sign-change function whose interior root on ``(p_s_minus, 1/n)`` is the threshold."""
    z = alpha * (n * p - 2.0) * (n * p - 1.0)
    q = 1.0 - p
    r = 1.0 - (n - 1) * p
    ratio = (n - 1) * p * p / (q * r)
    return -z + q - ratio**alpha * q * (z / r + 1.0)


def _inflection_ps(alpha: float, n: int, lo: float) -> float:
    lo = lo + INFLECTION_EDGE
    hi = 1.0 / n - INFLECTION_EDGE
    nodes = np.linspace(lo, hi, INFLECTION_SCAN + 1)
    values = [inflection_residual(p, alpha, n) for p in nodes]
    for a, b, fa, fb in zip(nodes[:-1], nodes[1:], values[:-1], values[1:]):
        if fa < 0.0 <= fb or fa <= 0.0 < fb:
            # increasing through the root: negate for the decreasing bisection
            return bisect_decreasing(lambda p: -inflection_residual(p, alpha, n), 0.0,
                                     float(a), float(b), xtol=INFLECTION_TOL)
    raise ArithmeticError(f"no inflection root found for alpha={alpha}, n={n}")


def inflection_threshold(alpha: float, n: int):
    """Inflection point of the alpha-fair tradeoff curve, or ``AlwaysConcave`` for n = 2."""
    alpha = check_alpha(alpha)
    n = check_n(n)
    if n == 2:
        return AlwaysConcave(alpha, n)
    lo = p_s_minus(alpha, n)
    if alpha == 1.0:
        p_ring = (3.0 - math.sqrt((5.0 * n - 9.0) / (n - 1.0))) / (2.0 * n)
    else:
        p_ring = _inflection_ps(alpha, n, lo)
    theta_ring = restricted_throughput(p_ring, n - 1, n)
    return InflectionResult(alpha, n, p_ring, theta_ring, lo)
