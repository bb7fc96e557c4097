"""Sampled majorization checks on the achievable rate region.

Membership uses the following characterization of the achievable region:
``x`` is achievable iff ``min_{P > 0} P * prod_j (1 + x_j / P) <= 1``, with
equality exactly on the boundary.  In ``s = log P`` the objective is convex,
so the minimizer is found by bisection on its derivative.  For two users the
test reduces to ``sqrt(x_1) + sqrt(x_2) <= 1``.
"""

from __future__ import annotations

import math

import numpy as np

from .constraint import bisect_decreasing
from .errors import DomainError
from .model import check_n, check_theta, critical_throughput, rates_from_control, throughput
from .report import PropertyReport

BOUNDARY_TOL = 1e-9
MAJORIZATION_TOL = 1e-12


def _log_gauge_slope(x: np.ndarray, P: float) -> float:
    return float(np.sum(x / (P + x)))


def region_gauge(x) -> float:
    """``min_P P prod(1 + x_j/P)``: at most 1 inside the region, exactly 1 on its boundary."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("rates must be nonnegative")
    x = x[x > 0]
    if x.size == 0:
        return 0.0
    if x.size == 1:
        return float(x[0])
    # stationary point: sum x_j / (P + x_j) = 1, decreasing in P
    hi = float(x.sum())
    lo = 0.0
    P = bisect_decreasing(lambda P: _log_gauge_slope(x, P), 1.0, lo, hi, xtol=1e-17 * hi)
    P = max(P, np.finfo(float).tiny)
    return float(math.exp(math.log(P) + np.sum(np.log1p(x / P))))


def in_region(x, tol: float = BOUNDARY_TOL) -> bool:
    return region_gauge(x) <= 1.0 + tol


def majorizes(y, x, tol: float = MAJORIZATION_TOL) -> bool:
    """``x ≺ y``: equal totals and every top-``k`` partial sum of ``x`` at most that of ``y``."""
    xs = np.cumsum(np.sort(np.asarray(x, dtype=float))[::-1])
    ys = np.cumsum(np.sort(np.asarray(y, dtype=float))[::-1])
    if abs(xs[-1] - ys[-1]) > tol * max(1.0, abs(ys[-1])):
        return False
    return bool(np.all(xs <= ys + tol))


def boundary_toward_center(x, tol: float = 1e-14):
    """First point ``x + s (c - x)`` of the segment toward ``c = mean(x) * 1`` on the boundary.

    Returns ``x`` itself when it is already on the boundary, and ``None`` when
    the whole segment stays inside the region.
    """
    x = np.asarray(x, dtype=float)
    c = np.full_like(x, x.mean())
    if abs(region_gauge(x) - 1.0) <= BOUNDARY_TOL:
        return x.copy()
    if region_gauge(c) <= 1.0:
        return None
    s = bisect_decreasing(lambda s: -region_gauge(x + s * (c - x)), -1.0, 0.0, 1.0, xtol=tol)
    return x + s * (c - x)


def _random_efficient(rng: np.random.Generator, n: int) -> np.ndarray:
    p = rng.dirichlet(np.ones(n))
    return np.minimum(p, 1.0 - 1e-12)


def sample_interior(rng: np.random.Generator, n: int, theta: float, attempts: int = 10_000):
    """Achievable ``x`` with throughput ``theta``: rates of a random efficient control, shrunk."""
    for _ in range(attempts):
        x = rates_from_control(_random_efficient(rng, n)).x
        total = throughput(x)
        if total >= theta:
            return x * (theta / total)
    raise RuntimeError(f"no efficient control with throughput >= {theta!r} sampled")


def sample_boundary(rng: np.random.Generator, n: int, theta: float, attempts: int = 10_000):
    """Boundary rate vector with throughput ``theta``.

    Walks from the uniform control (throughput ``theta_n``) toward a random
    efficient control of larger throughput and bisects for ``theta``.
    """
    u = np.full(n, 1.0 / n)
    for _ in range(attempts):
        p = _random_efficient(rng, n)
        if throughput(rates_from_control(p)) > theta:
            break
    else:
        raise RuntimeError(f"no efficient control with throughput > {theta!r} sampled")
    s = bisect_decreasing(lambda s: -throughput(rates_from_control(u + s * (p - u))),
                          -theta, 0.0, 1.0, xtol=1e-15)
    return rates_from_control(u + s * (p - u)).x


def majorization_probe(n: int, theta: float, samples: int, seed: int = 0) -> PropertyReport:
    """For sampled achievable ``x`` with ``T(x) = theta``, find boundary ``x' ≺ x``.

    Also samples pairs of boundary points at the same throughput and checks
    that neither majorizes the other unless they agree up to permutation.
    The pair check is sampled and cannot establish the property in general.
    """
    n = check_n(n)
    theta = check_theta(theta)
    if theta <= critical_throughput(n):
        raise DomainError("majorization probe needs theta in (theta_n, 1)")
    rng = np.random.default_rng(seed)
    report = PropertyReport()

    successes = 0
    max_gauge_error = 0.0
    for _ in range(samples):
        x = sample_interior(rng, n, theta)
        xb = boundary_toward_center(x)
        if xb is None:
            continue
        max_gauge_error = max(max_gauge_error, abs(region_gauge(xb) - 1.0))
        if majorizes(x, xb, tol=1e-10) and abs(throughput(xb) - theta) <= 1e-10:
            successes += 1
    fraction = successes / samples if samples else None
    report.details["success_fraction"] = fraction
    report.details["max_boundary_gauge_error"] = max_gauge_error
    report.checks["boundary_majorized"] = None if fraction is None else fraction == 1.0

    compared = noncomparable = 0
    bound = [np.sort(sample_boundary(rng, n, theta)) for _ in range(samples)]
    for a, b in zip(bound[::2], bound[1::2]):
        if np.allclose(a, b, atol=1e-9, rtol=0.0):
            continue
        compared += 1
        if not (majorizes(a, b, tol=1e-10) or majorizes(b, a, tol=1e-10)):
            noncomparable += 1
    report.details["boundary_pairs_compared"] = compared
    report.details["boundary_pairs_noncomparable"] = noncomparable
    report.checks["boundary_noncomparable"] = (noncomparable == compared) if compared else None
    return report
