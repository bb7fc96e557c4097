"""Maximum Jain fairness under a throughput constraint.

For ``theta`` in ``[theta_t, theta_{t-1})`` the optimum activates ``t`` users:
one contends with a small probability ``p_s`` and ``t - 1`` with a common large
probability ``p_l``.  Below ``theta_n`` every user gets the equal rate
``theta / n``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._parallel import ordered_map
from .constraint import equal_rate_control, regime_index, solve_ps
from .errors import DomainError, GridTooCoarse
from .grid import Grid
from .model import (
    ControlVector,
    Regime,
    RestrictedControl,
    check_n,
    check_theta,
    critical_throughputs,
    jain_fairness,
    rates_from_control,
    single_value_rate,
)
from .report import PropertyReport

CSV_COLUMNS = ("theta", "F_star", "regime", "t", "n_prime", "k", "p_s", "p_l", "x_s", "x_l")


@dataclass(frozen=True)
class TradeoffPoint:
    """Optimal Jain fairness at one target throughput.

    In the equal-rate regime all ``n`` users contend with ``p_s == p_l`` and
    ``k == n_prime == n``; that control is not efficient.
    """

    theta: float
    n: int
    F_star: float
    regime: Regime
    t: int
    n_prime: int
    k: int
    p_s: float
    p_l: float
    x_s: float
    x_l: float

    @property
    def control(self) -> ControlVector:
        values = [0.0] * (self.n - self.n_prime)
        values += [self.p_s] * self.k + [self.p_l] * (self.n_prime - self.k)
        return ControlVector(values)

    @property
    def restricted(self) -> RestrictedControl | None:
        if self.regime is Regime.EQUAL_RATE:
            return None
        return RestrictedControl(self.p_s, self.k, self.n_prime, self.n)

    def row(self) -> dict:
        return {c: getattr(self, c) for c in CSV_COLUMNS}

    def scaled_to(self, m: int) -> "TradeoffPoint":
        """The same control padded with silent users, for ``m >= n_prime`` users."""
        if m < self.n_prime:
            raise DomainError(f"cannot embed {self.n_prime} active users in n={m}")
        return TradeoffPoint(self.theta, m, self.F_star * self.n / m, self.regime,
                             self.t, self.n_prime, self.k, self.p_s, self.p_l,
                             self.x_s, self.x_l)


def _equal_rate_point(theta: float, n: int) -> TradeoffPoint:
    p = equal_rate_control(theta, n)
    x = theta / n
    return TradeoffPoint(theta, n, 1.0, Regime.EQUAL_RATE, n, n, n, p, p, x, x)


def jain_optimal_point(theta: float, n: int) -> TradeoffPoint:
    """Maximize Jain fairness subject to ``T(x(p)) = theta``."""
    theta = check_theta(theta)
    n = check_n(n)
    crit = critical_throughputs(n)
    if theta < crit.of(n):
        return _equal_rate_point(theta, n)
    t = regime_index(theta, n)
    if theta == crit.of(t):
        p = 1.0 / t
        x = single_value_rate(p, t)
        return TradeoffPoint(theta, n, t / n, Regime.CRITICAL_POINT, t, t, 1, p, p, x, x)
    p_s = solve_ps(theta, 1, t)
    rc = RestrictedControl(p_s, 1, t, n)
    F = jain_fairness(rates_from_control(rc.control()))
    return TradeoffPoint(theta, n, F, Regime.TWO_VALUE, t, t, 1, p_s, rc.p_l, rc.x_s, rc.x_l)


def jain_optimal_point_inequality(theta: float, n: int) -> TradeoffPoint:
    """Maximize Jain fairness subject to ``T(x(p)) >= theta``.

    The optimum coincides with the equality-constrained one: fairness is
    nonincreasing in the target throughput, so raising it never helps.
    """
    return jain_optimal_point(theta, n)


@dataclass(frozen=True)
class TradeoffCurve:
    n: int
    points: tuple
    grid: Grid

    @property
    def thetas(self) -> np.ndarray:
        return np.array([pt.theta for pt in self.points])

    @property
    def F(self) -> np.ndarray:
        return np.array([pt.F_star for pt in self.points])

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(pt, name) for pt in self.points])

    def __len__(self):
        return len(self.points)


def jain_curve(n: int, grid: Grid) -> dict:
    """Tradeoff curves for every ``m`` in ``2..n`` over one grid.

    Each grid value is solved once, for the ``t`` whose active interval
    ``[theta_t, theta_{t-1})`` contains it, and the result is rescaled by
    ``t / m`` for every ``m >= t``.  Critical throughputs in range are always
    grid members.
    """
    n = check_n(n)
    if grid.lo <= 0.0 or grid.hi > 1.0:
        raise DomainError("grid must lie within (0, 1)")
    crit = critical_throughputs(n)
    thetas = grid.points(inject=crit.theta[1:])

    def solve_column(theta):
        if theta < crit.of(n):
            return {m: _equal_rate_point(theta, m) for m in range(2, n + 1)}
        t = regime_index(theta, n)
        active = jain_optimal_point(theta, t)
        column = {m: _equal_rate_point(theta, m) for m in range(2, t)}
        column.update({m: active.scaled_to(m) for m in range(t, n + 1)})
        return column

    columns = ordered_map(solve_column, thetas)
    return {m: TradeoffCurve(m, tuple(col[m] for col in columns), grid)
            for m in range(2, n + 1)}


def jain_interpolation(F: float, n: int) -> float:
    """Smooth throughput interpolation ``(1 - 1/(nF))^(nF - 1)`` through ``(theta_t, t/n)``."""
    n = check_n(n, minimum=1)
    if not 1.0 / n <= F <= 1.0:
        raise DomainError(f"F must lie in [1/n, 1], got {F!r}")
    nF = n * F
    return (1.0 - 1.0 / nF) ** (nF - 1.0)


def _second_differences(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    h1 = x[1:-1] - x[:-2]
    h2 = x[2:] - x[1:-1]
    return 2.0 * ((y[2:] - y[1:-1]) / h2 - (y[1:-1] - y[:-2]) / h1) / (h1 + h2)


def _strict(values: np.ndarray, sign: int):
    if values.size == 0:
        return None
    return bool(np.all(sign * values > 0))


def jain_curve_properties(curve: TradeoffCurve, max_step: float = 1e-3) -> PropertyReport:
    """Check monotonicity, continuity, piecewise convexity and the kink at ``theta_{n-1}``.

    Convexity uses second divided differences of points strictly inside each
    critical interval.  The kink check compares one-sided slopes with
    ``h = 10 * step`` (see :func:`kink_slope_ratio`) and expects the
    left/right ratio ``(n-2)/(n-1)``.
    """
    step = curve.grid.step
    if step > max_step:
        raise GridTooCoarse(f"grid step {step!r} exceeds {max_step!r}")
    n = curve.n
    crit = critical_throughputs(n)
    theta = curve.thetas
    F = curve.F
    report = PropertyReport()
    active = theta >= crit.of(n)
    th, Fa = theta[active], F[active]

    report.checks["decreasing"] = _strict(-np.diff(Fa), 1) if th.size >= 2 else None

    jumps = {}
    for t in range(2, n):
        hits = np.flatnonzero(theta == crit.of(t))
        if hits.size and hits[0] > 0 and theta[hits[0] - 1] >= crit.of(t + 1):
            i = hits[0]
            jumps[t] = abs(F[i] - F[i - 1])
    report.details["max_jump"] = float(max(jumps.values())) if jumps else None
    report.checks["continuous"] = (all(j < 10 * step for j in jumps.values())
                                   if jumps else None)

    convex, second_min = [], []
    ps_dec, xs_dec = [], []
    for t in range(2, n + 1):
        inside = (theta >= crit.of(t)) & (theta < crit.of(t - 1))
        if np.count_nonzero(inside) < 3:
            continue
        d2 = _second_differences(theta[inside], F[inside])
        convex.append(bool(np.all(d2 > 0)))
        second_min.append(float(d2.min()))
        ps_dec.append(bool(np.all(np.diff(curve.column("p_s")[inside]) < 0)))
        xs_dec.append(bool(np.all(np.diff(curve.column("x_s")[inside]) < 0)))
    report.checks["piecewise_convex"] = all(convex) if convex else None
    report.details["min_second_difference"] = min(second_min) if second_min else None
    report.checks["p_s_piecewise_decreasing"] = all(ps_dec) if ps_dec else None
    report.checks["x_s_piecewise_decreasing"] = all(xs_dec) if xs_dec else None
    if th.size >= 2:
        report.checks["p_l_increasing"] = bool(np.all(np.diff(curve.column("p_l")[active]) > 0))
        report.checks["x_l_increasing"] = bool(np.all(np.diff(curve.column("x_l")[active]) > 0))
    else:
        report.checks["p_l_increasing"] = report.checks["x_l_increasing"] = None

    report.checks["kink_slope_ratio"] = None
    if n >= 3:
        ratio = kink_slope_ratio(curve)
        if ratio is not None:
            expected = (n - 2) / (n - 1)
            report.details["kink_slope_ratio"] = ratio
            report.details["kink_slope_ratio_expected"] = expected
            report.checks["kink_slope_ratio"] = abs(ratio - expected) <= 0.05 * expected
    return report


def _one_sided_slope(x0, x1, x2, f0, f1, f2) -> float:
    # derivative at x0 of the quadratic through three (possibly uneven) nodes
    return (f0 * (1.0 / (x0 - x1) + 1.0 / (x0 - x2))
            + f1 * (x0 - x2) / ((x1 - x0) * (x1 - x2))
            + f2 * (x0 - x1) / ((x2 - x0) * (x2 - x1)))


def kink_slope_ratio(curve: TradeoffCurve, offset: int = 10) -> float | None:
    """Left/right one-sided slope ratio of the curve at ``theta_{n-1}``.

    Each slope is a second-order one-sided difference through the critical
    point and the grid points ``offset`` and ``2 * offset`` positions away, so
    ``h ~ offset * step``.  The first-order quotient at that ``h`` is biased by
    the curvature spike just right of the critical point.
    """
    n = curve.n
    target = critical_throughputs(n).of(n - 1)
    theta, F = curve.thetas, curve.F
    hits = np.flatnonzero(theta == target)
    if not hits.size:
        return None
    i = int(hits[0])
    if i - 2 * offset < 0 or i + 2 * offset >= theta.size:
        return None
    lo = [i, i - offset, i - 2 * offset]
    hi = [i, i + offset, i + 2 * offset]
    left = _one_sided_slope(*theta[lo], *F[lo])
    right = _one_sided_slope(*theta[hi], *F[hi])
    return float(left / right)
