"""Throughput equality constraint over restricted (two-value) controls."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, OutOfRegime
from .model import critical_throughput, critical_throughputs

PS_FLOOR = 1e-15
PS_XTOL = 1e-13
MAX_ITER = 200


def _check_box(k: int, n_prime: int) -> None:
    if n_prime < 2:
        raise DomainError(f"n' must be >= 2, got {n_prime}")
    if not 1 <= k <= n_prime - 1:
        raise DomainError(f"k must lie in 1..n'-1, got k={k}, n'={n_prime}")


def _throughput(p_s: float, k: int, n_prime: int) -> float:
    if p_s == 1.0 / n_prime:
        return n_prime * p_s * (1.0 - p_s) ** (n_prime - 1)
    p_l = (1.0 - k * p_s) / (n_prime - k)
    q_s, q_l = 1.0 - p_s, 1.0 - p_l
    x_s = p_s * q_s ** (k - 1) * q_l ** (n_prime - k)
    x_l = p_l * q_s**k * q_l ** (n_prime - k - 1)
    return k * x_s + (n_prime - k) * x_l


def restricted_throughput(p_s: float, k: int, n_prime: int) -> float:
    """Throughput ``k x_s + (n' - k) x_l`` of the control ``(p_s, k, n')``.

    Strictly decreasing in ``p_s`` on ``(0, 1/n']``.  ``k = n'`` is accepted
    at the uniform point ``p_s = 1/n'``.
    """
    if k == n_prime and n_prime >= 2 and p_s == 1.0 / n_prime:
        return _throughput(p_s, k, n_prime)
    _check_box(k, n_prime)
    if not 0.0 < p_s <= 1.0 / n_prime:
        raise DomainError(f"p_s={p_s!r} outside (0, 1/n']")
    return _throughput(p_s, k, n_prime)


def bisect_decreasing(f, target: float, lo: float, hi: float,
                      xtol: float = PS_XTOL, maxiter: int = MAX_ITER) -> float:
    """Root of ``f(x) = target`` for ``f`` decreasing with ``f(lo) >= target >= f(hi)``."""
    for _ in range(maxiter):
        if hi - lo <= xtol:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if f(mid) > target:
            lo = mid
        else:
            hi = mid
    f_lo, f_hi = f(lo), f(hi)
    return lo if abs(f_lo - target) < abs(f_hi - target) else hi


def _quadratic_ps(theta: float) -> float:
    # p^2 + (1 - p)^2 = theta, smaller root
    return 0.5 * (1.0 - math.sqrt(2.0 * theta - 1.0))


def _bisect_ps(theta: float, k: int, n_prime: int) -> float:
    return bisect_decreasing(lambda ps: _throughput(ps, k, n_prime), theta,
                             PS_FLOOR, 1.0 / n_prime)


def solve_ps(theta: float, k: int, n_prime: int) -> float | None:
    """Unique ``p_s`` in ``(0, 1/n']`` with ``T(p_s, k, n') = theta``, else ``None``.

    A solution exists iff ``theta`` lies in ``[theta_{n'}, theta_{n'-k})``.
    """
    _check_box(k, n_prime)
    lo = critical_throughput(n_prime)
    hi = critical_throughput(n_prime - k)
    if not lo <= theta < hi:
        return None
    if theta == lo:
        return 1.0 / n_prime
    if n_prime == 2:
        return _quadratic_ps(theta)
    return _bisect_ps(theta, k, n_prime)


@dataclass(frozen=True)
class ThroughputRange:
    """Half-open interval ``[lo, hi)`` of throughputs reachable with ``(k, n')``."""

    k: int
    n_prime: int
    lo: float
    hi: float

    def __contains__(self, theta: float) -> bool:
        return self.lo <= theta < self.hi

    def issubset(self, other: "ThroughputRange") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi


def achievable_range(k: int, n_prime: int) -> ThroughputRange:
    _check_box(k, n_prime)
    return ThroughputRange(k, n_prime, critical_throughput(n_prime),
                           critical_throughput(n_prime - k))


def regime_index(theta: float, n: int) -> int:
    """Index ``t`` in ``2..n`` with ``theta_t <= theta < theta_{t-1}``.

    Raises :class:`OutOfRegime` for ``theta < theta_n`` or ``theta >= 1``.
    """
    if n < 2:
        raise DomainError("n must be >= 2")
    crit = critical_throughputs(n).theta
    if theta >= 1.0 or theta < crit[n - 1]:
        raise OutOfRegime(f"theta={theta!r} outside [theta_{n}, 1)")
    for t in range(2, n + 1):
        if theta >= crit[t - 1]:
            return t
    raise AssertionError("unreachable")


@dataclass(frozen=True)
class FeasiblePairSet:
    """All ``(k, n')`` for which the throughput constraint is solvable."""

    t: int
    n: int
    pairs: frozenset

    def __contains__(self, pair) -> bool:
        return tuple(pair) in self.pairs

    def __iter__(self):
        return iter(sorted(self.pairs, key=lambda kn: (kn[1], kn[0])))

    def __len__(self):
        return len(self.pairs)


def feasible_pairs(theta: float, n: int) -> FeasiblePairSet:
    t = regime_index(theta, n)
    pairs = frozenset((k, n_prime)
                      for n_prime in range(t, n + 1)
                      for k in range(n_prime - t + 1, n_prime))
    return FeasiblePairSet(t, n, pairs)


def equal_rate_control(theta: float, n: int) -> float:
    """Smaller root ``p`` of ``n p (1-p)^(n-1) = theta`` for ``theta <= theta_n``.

    Every user contends with ``p``, giving each the rate ``theta / n``.
    """
    theta_n = critical_throughput(n)
    if not 0.0 < theta <= theta_n:
        raise DomainError(f"equal rates need theta in (0, theta_n], got {theta!r}")
    if theta == theta_n:
        return 1.0 / n
    target = theta / n
    # increasing on [0, 1/n]: negate to reuse the decreasing bisection
    return bisect_decreasing(lambda p: -p * (1.0 - p) ** (n - 1), -target,
                             0.0, 1.0 / n, xtol=1e-16)
