"""Slotted Aloha rate model on the collision channel.

Controls are contention probabilities ``p`` in ``[0, 1)^n``; the rate of user
``i`` under saturated queues is ``p_i * prod_{j != i} (1 - p_j)``.  Efficient
controls (components summing to one) are exactly those whose rates lie on the
boundary of the achievable region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

from .errors import DomainError, InvalidN, InvalidParameters, ZeroVector

EFFICIENCY_TOL = 1e-12


def _frozen_array(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64).reshape(-1)
    if arr.size == 0:
        raise DomainError(f"{name} must have at least one component")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ControlVector:
    """Contention probabilities, one per user, each in [0, 1)."""

    p: np.ndarray

    def __post_init__(self):
        arr = _frozen_array(self.p, "control")
        if np.any(arr < 0.0) or np.any(arr >= 1.0):
            raise DomainError("control components must lie in [0, 1)")
        object.__setattr__(self, "p", arr)

    @property
    def n(self) -> int:
        return int(self.p.size)

    def is_efficient(self, tol: float = EFFICIENCY_TOL) -> bool:
        return abs(math.fsum(self.p) - 1.0) <= tol

    def canonical(self) -> "ControlVector":
        return ControlVector(np.sort(self.p))

    def __eq__(self, other):
        if not isinstance(other, ControlVector):
            return NotImplemented
        return np.array_equal(self.p, other.p)

    def __hash__(self):
        return hash(self.p.tobytes())

    def __len__(self):
        return self.n

    def __repr__(self):
        return f"ControlVector({self.p.tolist()!r})"


@dataclass(frozen=True, eq=False)
class RateVector:
    """Per-user service rates in packets/slot."""

    x: np.ndarray

    def __post_init__(self):
        arr = _frozen_array(self.x, "rate vector")
        if np.any(arr < 0.0):
            raise DomainError("rates must be nonnegative")
        object.__setattr__(self, "x", arr)

    @property
    def n(self) -> int:
        return int(self.x.size)

    def __eq__(self, other):
        if not isinstance(other, RateVector):
            return NotImplemented
        return np.array_equal(self.x, other.x)

    def __hash__(self):
        return hash(self.x.tobytes())

    def __len__(self):
        return self.n

    def __repr__(self):
        return f"RateVector({self.x.tolist()!r})"


ControlLike = Union[ControlVector, Sequence[float], np.ndarray]
RateLike = Union[RateVector, Sequence[float], np.ndarray]


def _as_control(p: ControlLike) -> ControlVector:
    return p if isinstance(p, ControlVector) else ControlVector(p)


def _rates_array(x: RateLike) -> np.ndarray:
    if isinstance(x, RateVector):
        return x.x
    return RateVector(x).x


def rates_from_control(p: ControlLike) -> RateVector:
    """Worst-case service rates ``x_i = p_i * prod_{j != i}(1 - p_j)``."""
    p = _as_control(p).p
    q = 1.0 - p
    # prefix/suffix products avoid dividing by (1 - p_i)
    before = np.concatenate(([1.0], np.cumprod(q[:-1])))
    after = np.concatenate((np.cumprod(q[::-1][:-1])[::-1], [1.0]))
    return RateVector(p * before * after)


def throughput(x: RateLike) -> float:
    """Sum-user throughput."""
    return math.fsum(_rates_array(x))


def jain_fairness(x: RateLike) -> float:
    """Jain-Chiu-Hawe index ``T(x)^2 / (n ||x||^2)``, in [1/n, 1]."""
    arr = _rates_array(x)
    sq = math.fsum(arr * arr)
    if sq == 0.0:
        raise ZeroVector("Jain fairness is undefined for the zero vector")
    total = math.fsum(arr)
    return total * total / (arr.size * sq)


def alpha_utility(x: float, alpha: float) -> float:
    """Isoelastic utility of a single rate; ``log`` at alpha = 1."""
    if alpha == 1.0:
        return math.log(x) if x > 0.0 else -math.inf
    if x == 0.0:
        return 0.0 if alpha < 1.0 else -math.inf
    return x ** (1.0 - alpha) / (1.0 - alpha)


def alpha_objective(x: RateLike, alpha: float) -> float:
    """Sum of per-user alpha-fair utilities; ``-inf`` if a rate is 0 and alpha >= 1."""
    if alpha < 0.0:
        raise DomainError("alpha must be nonnegative")
    arr = _rates_array(x)
    if alpha >= 1.0 and np.any(arr == 0.0):
        return -math.inf
    if alpha == 1.0:
        return math.fsum(np.log(arr))
    return math.fsum(np.power(arr, 1.0 - alpha)) / (1.0 - alpha)


@dataclass(frozen=True)
class CriticalThroughputs:
    """Throughputs ``theta_t = (1 - 1/t)^(t-1)`` of t uniformly contending users.

    ``theta[t - 1]`` holds ``theta_t`` so that indexing with :meth:`of` is
    one-based, matching the user count.
    """

    theta: tuple

    @property
    def n(self) -> int:
        return len(self.theta)

    def of(self, t: int) -> float:
        if not 1 <= t <= self.n:
            raise InvalidN(f"critical index t={t} outside 1..{self.n}")
        return self.theta[t - 1]

    def __iter__(self):
        return iter(self.theta)

    def __len__(self):
        return self.n


def critical_throughput(t: int) -> float:
    if t < 1:
        raise InvalidN("t must be >= 1")
    if t == 1:
        return 1.0
    return (1.0 - 1.0 / t) ** (t - 1)


@lru_cache(maxsize=None)
def critical_throughputs(n: int) -> CriticalThroughputs:
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise InvalidN(f"number of users must be an integer >= 1, got {n!r}")
    return CriticalThroughputs(tuple(critical_throughput(t) for t in range(1, int(n) + 1)))


def single_value_rate(p: float, n: int) -> float:
    """Rate ``p (1 - p)^(n - 1)`` of each user when all n contend with p."""
    if not 0.0 <= p <= 1.0:
        raise DomainError("p must lie in [0, 1]")
    if n < 2:
        raise InvalidN("n must be >= 2")
    return p * (1.0 - p) ** (n - 1)


@dataclass(frozen=True)
class RestrictedControl:
    """Efficient control with ``k`` components at ``p_s``, ``n' - k`` at ``p_l``.

    The remaining ``n - n'`` users are silent.  ``k == n'`` is accepted only for
    the uniform limit ``p_s == 1/n'``.
    """

    p_s: float
    k: int
    n_prime: int
    n: int

    def __post_init__(self):
        n, n_prime, k, p_s = self.n, self.n_prime, self.k, self.p_s
        if not (2 <= n_prime <= n):
            raise InvalidParameters(f"need 2 <= n' <= n, got n'={n_prime}, n={n}")
        if not (1 <= k <= n_prime):
            raise InvalidParameters(f"need 1 <= k <= n', got k={k}, n'={n_prime}")
        if not (0.0 < p_s <= 1.0 / n_prime):
            raise InvalidParameters(f"p_s={p_s!r} outside (0, 1/n']")
        if k == n_prime and p_s != 1.0 / n_prime:
            raise InvalidParameters("k = n' is allowed only at p_s = 1/n'")

    @property
    def is_uniform(self) -> bool:
        return self.p_s == 1.0 / self.n_prime

    @property
    def p_l(self) -> float:
        if self.is_uniform:
            return self.p_s
        return (1.0 - self.k * self.p_s) / (self.n_prime - self.k)

    @property
    def x_s(self) -> float:
        p_s, p_l = self.p_s, self.p_l
        return p_s * (1.0 - p_s) ** (self.k - 1) * (1.0 - p_l) ** (self.n_prime - self.k)

    @property
    def x_l(self) -> float:
        if self.is_uniform:
            return self.x_s
        p_s, p_l = self.p_s, self.p_l
        return p_l * (1.0 - p_s) ** self.k * (1.0 - p_l) ** (self.n_prime - self.k - 1)

    def control(self) -> ControlVector:
        values = [0.0] * (self.n - self.n_prime)
        values += [self.p_s] * self.k + [self.p_l] * (self.n_prime - self.k)
        return ControlVector(values)


def expand_restricted(rc: RestrictedControl):
    """Canonical (nondecreasing) control together with ``(x_s, x_l)``."""
    return rc.control(), rc.x_s, rc.x_l


class Measure(str, Enum):
    JAIN = "jain"
    ALPHA = "alpha"


@dataclass(frozen=True)
class FairnessMeasure:
    """Jain, or alpha-fair with ``alpha >= 1``."""

    kind: Measure
    alpha: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Measure(self.kind))
        if self.kind is Measure.ALPHA:
            if self.alpha is None or not self.alpha >= 1.0:
                raise DomainError("alpha-fair measure requires alpha >= 1")
        elif self.alpha is not None:
            raise DomainError("Jain measure takes no alpha")

    @classmethod
    def jain(cls) -> "FairnessMeasure":
        return cls(Measure.JAIN)

    @classmethod
    def alpha_fair(cls, alpha: float) -> "FairnessMeasure":
        return cls(Measure.ALPHA, float(alpha))

    def __call__(self, x: RateLike) -> float:
        if self.kind is Measure.JAIN:
            return jain_fairness(x)
        return alpha_objective(x, self.alpha)

    def __str__(self):
        return "jain" if self.kind is Measure.JAIN else f"alpha({self.alpha:g})"


class Regime(str, Enum):
    EQUAL_RATE = "EqualRate"
    CRITICAL_POINT = "CriticalPoint"
    TWO_VALUE = "TwoValue"

    def __str__(self):
        return self.value


def check_theta(theta: float) -> float:
    if not (isinstance(theta, (int, float)) and 0.0 < theta < 1.0):
        raise DomainError("theta must lie in (0,1)")
    return float(theta)


def check_n(n: int, minimum: int = 2) -> int:
    if isinstance(n, bool) or int(n) != n or n < minimum:
        raise InvalidN(f"n must be an integer >= {minimum}, got {n!r}")
    return int(n)
