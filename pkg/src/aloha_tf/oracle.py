"""Brute-force oracle: exhaustive search over a discretized simplex of controls.

Every grid control ``c / R`` (``c`` a composition of ``R`` into ``n`` parts,
no part equal to ``R``) whose throughput lands in ``[theta, theta' + band]`` is
kept, and its rates are scaled down by ``theta / T`` onto the constraint.
Here ``theta' = max(theta, theta_n)``: efficient controls never reach below
``theta_n``, so smaller targets are met by shrinking near-uniform controls.
Shrinking rates keeps them achievable, so each candidate is exactly feasible
and the oracle optimum never exceeds the true one.

A grid this coarse rarely has a point close to the constraint near the
optimum, so a second scan fixes the first ``n - 2`` components on the grid
and solves the remaining pair exactly: along ``p_{n-1} + p_n = r`` the
throughput is a quadratic in the split.  The reported optimum is the better
of the two scans.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from ._parallel import ordered_map
from .errors import DomainError, NoFeasiblePoint
from .model import FairnessMeasure, Measure, check_theta, critical_throughput

MAX_N = 4
MIN_RESOLUTION = 50
DEFAULT_RESOLUTION = {2: 2000, 3: 200, 4: 60}
TOP_K = 10


def compositions(n: int, resolution: int) -> np.ndarray:
    """All nonnegative integer ``n``-tuples summing to ``resolution``, lexicographic."""
    if n == 1:
        return np.array([[resolution]], dtype=np.int64)
    bars = np.array(list(combinations(range(resolution + n - 1), n - 1)), dtype=np.int64)
    bars = bars.reshape(-1, n - 1)
    edges = np.hstack([np.full((bars.shape[0], 1), -1), bars,
                       np.full((bars.shape[0], 1), resolution + n - 1)])
    return np.diff(edges, axis=1) - 1


def batch_rates(P: np.ndarray) -> np.ndarray:
    """Row-wise ``x_i = p_i prod_{j != i} (1 - p_j)`` for components below 1."""
    Q = 1.0 - P
    return P * (np.prod(Q, axis=1)[:, None] / Q)


def batch_objective(X: np.ndarray, measure: FairnessMeasure) -> np.ndarray:
    if measure.kind is Measure.JAIN:
        total = X.sum(axis=1)
        return total * total / (X.shape[1] * np.einsum("ij,ij->i", X, X))
    alpha = measure.alpha
    with np.errstate(divide="ignore"):
        if alpha == 1.0:
            return np.log(X).sum(axis=1)
        return np.power(X, 1.0 - alpha).sum(axis=1) / (1.0 - alpha)


def distinct_nonzero_values(p, tol: float) -> int:
    """Number of clusters among nonzero components, joining gaps up to ``tol``."""
    values = np.sort(np.asarray(p, dtype=float))
    values = values[values > tol / 2]
    if values.size == 0:
        return 0
    return int(1 + np.count_nonzero(np.diff(values) > tol))


@dataclass(frozen=True)
class OracleResult:
    """Outcome of one oracle run.

    ``top`` lists the best distinct (sorted) simplex-grid controls from the
    banded scan together with their fairness; ``grid_best_F`` and
    ``line_best_F`` are the two scans' optima, and ``best_F`` the larger.
    """

    theta: float
    n: int
    measure: str
    resolution: int
    band: float
    best_control: tuple
    best_F: float
    constraint_residual: float
    distinct_nonzero_values: int
    candidates: int
    grid_best_F: float | None = None
    line_best_F: float | None = None
    top: tuple = field(default=())
    square_best_F: float | None = None
    reference_rank: int | None = None

    def rank_of(self, p, atol: float = 1e-12) -> int | None:
        """0-based rank of grid control ``p`` (any order) in :attr:`top`, else ``None``."""
        target = np.sort(np.asarray(p, dtype=float))
        for rank, (c, _) in enumerate(self.top):
            if np.allclose(c, target, atol=atol, rtol=0.0):
                return rank
        return None

    def to_dict(self) -> dict:
        return {
            "theta": self.theta, "n": self.n, "measure": self.measure,
            "resolution": self.resolution, "band": self.band,
            "best_control": list(self.best_control), "best_F": self.best_F,
            "constraint_residual": self.constraint_residual,
            "distinct_nonzero_values": self.distinct_nonzero_values,
            "candidates": self.candidates,
            "grid_best_F": self.grid_best_F, "line_best_F": self.line_best_F,
            "top": [{"control": list(c), "F": f} for c, f in self.top],
            "square_best_F": self.square_best_F,
            "reference_rank": self.reference_rank,
        }


def _scan(P: np.ndarray, theta: float, ceiling: float, measure: FairnessMeasure):
    X = batch_rates(P)
    T = X.sum(axis=1)
    keep = (T >= theta) & (T <= ceiling)
    if not np.any(keep):
        return None
    P, X, T = P[keep], X[keep], T[keep]
    F = batch_objective(X * (theta / T)[:, None], measure)
    return P, F, T - theta


def _line_scan(n: int, resolution: int, theta: float, measure: FairnessMeasure):
    """Controls with ``n - 2`` grid components and an exactly solved last pair."""
    C = compositions(n - 1, resolution)
    C = C[np.all(C[:, :-1] < resolution, axis=1)]
    fixed = C[:, :-1] / resolution
    r = C[:, -1] / resolution
    q = 1.0 - fixed
    A = np.prod(q, axis=1)
    # throughput of the fixed users among themselves
    Cf = (fixed * (A[:, None] / q)).sum(axis=1)
    # T(s) = (2A - C)(s^2 - r s) + A r + C (1 - r) with s the smaller of the pair
    lead = 2.0 * A - Cf
    with np.errstate(divide="ignore", invalid="ignore"):
        u = (theta - A * r - Cf * (1.0 - r)) / lead
        ok = (lead != 0.0) & (u <= 0.0) & (u >= -r * r / 4.0)
        s = 0.5 * (r - np.sqrt(np.maximum(r * r + 4.0 * u, 0.0)))
    P = np.column_stack([fixed, s, r - s])[ok]
    P = P[np.all(P < 1.0, axis=1) & np.all(P >= 0.0, axis=1)]
    if P.shape[0] == 0:
        return None
    X = batch_rates(P)
    T = X.sum(axis=1)
    good = np.abs(T - theta) <= 1e-12
    if not np.any(good):
        return None
    return P[good], batch_objective(X[good], measure), T[good] - theta


def snap_to_grid(p, resolution: int) -> np.ndarray:
    """Nearest simplex grid point by largest-remainder rounding."""
    scaled = np.asarray(p, dtype=float) * resolution
    base = np.floor(scaled).astype(np.int64)
    short = resolution - int(base.sum())
    order = np.argsort(-(scaled - base), kind="stable")
    base[order[:short]] += 1
    return base / resolution


def _top_distinct(P: np.ndarray, F: np.ndarray, k: int) -> tuple:
    order = np.argsort(-F, kind="stable")
    top, seen = [], set()
    for idx in order:
        key = tuple(float(v) for v in np.sort(P[idx]))
        if key in seen:
            continue
        seen.add(key)
        top.append((key, float(F[idx])))
        if len(top) == k:
            break
    return tuple(top)


def _rank_of_nearest(P: np.ndarray, F: np.ndarray, reference) -> int:
    ref = np.sort(np.asarray(reference, dtype=float))
    Ps = np.sort(P, axis=1)
    nearest = int(np.argmin(np.abs(Ps - ref).sum(axis=1)))
    better = Ps[F > F[nearest]]
    return len({tuple(row) for row in better})


def oracle_optimum(theta: float, n: int, measure: FairnessMeasure,
                   resolution: int | None = None, band: float = 5e-3,
                   square: bool = False, reference=None) -> OracleResult:
    """Best fairness over feasible grid controls near the throughput target.

    ``constraint_residual`` is the throughput excess ``T - theta`` of the
    winning control before it is scaled onto the constraint.  With
    ``square=True`` and ``n = 2`` the full square ``[0, 1)^2`` is scanned as
    well, to confirm that inefficient controls never do better.  Given a
    ``reference`` control, ``reference_rank`` is the rank (0 = best) of the
    kept grid control nearest to it among distinct sorted candidates.
    """
    theta = check_theta(theta)
    if not 2 <= n <= MAX_N:
        raise DomainError(f"oracle supports n ≤ {MAX_N}")
    if resolution is None:
        resolution = DEFAULT_RESOLUTION[n]
    if resolution < MIN_RESOLUTION:
        raise DomainError(f"resolution must be >= {MIN_RESOLUTION}")
    if not band > 0.0:
        raise DomainError("band must be positive")

    ceiling = max(theta, critical_throughput(n)) + band
    C = compositions(n, resolution)
    C = C[np.all(C < resolution, axis=1)]
    # partition on the first component; chunks keep lexicographic order
    firsts = np.unique(C[:, 0])
    chunks = np.array_split(firsts, min(len(firsts), 16))
    parts = ordered_map(lambda fs: _scan(C[np.isin(C[:, 0], fs)] / resolution, theta,
                                         ceiling, measure), chunks)
    parts = [pt for pt in parts if pt is not None]
    line = _line_scan(n, resolution, theta, measure)
    if not parts and line is None:
        raise NoFeasiblePoint(f"no grid control within band {band!r} of theta={theta!r}")

    best_control, best_F, residual = None, -np.inf, None
    grid_best = line_best = reference_rank = None
    top, count = (), 0
    if parts:
        P = np.vstack([pt[0] for pt in parts])
        F = np.concatenate([pt[1] for pt in parts])
        R = np.concatenate([pt[2] for pt in parts])
        # stable argmax: ties keep the lexicographically smallest control
        best = int(np.argmax(F))
        best_control, best_F, residual = P[best], float(F[best]), float(R[best])
        grid_best, top, count = best_F, _top_distinct(P, F, TOP_K), int(F.size)
        if reference is not None:
            reference_rank = _rank_of_nearest(P, F, reference)
    if line is not None:
        i = int(np.argmax(line[1]))
        line_best = float(line[1][i])
        if best_control is None or line_best > best_F:
            best_control, best_F, residual = np.sort(line[0][i]), line_best, float(line[2][i])

    square_best = None
    if square and n == 2:
        grid = np.arange(resolution) / resolution
        A, B = np.meshgrid(grid, grid, indexing="ij")
        sq = _scan(np.column_stack([A.ravel(), B.ravel()]), theta, theta + band, measure)
        if sq is not None:
            square_best = float(sq[1].max())

    return OracleResult(
        theta=theta, n=n, measure=str(measure), resolution=resolution, band=band,
        best_control=tuple(float(v) for v in best_control), best_F=best_F,
        constraint_residual=residual,
        distinct_nonzero_values=distinct_nonzero_values(best_control, 1.5 / resolution),
        candidates=count, grid_best_F=grid_best, line_best_F=line_best,
        top=top, square_best_F=square_best, reference_rank=reference_rank,
    )


def oracle_gap_bound(n: int, resolution: int) -> float:
    """Tolerated ``|F* - best_F|`` at the default resolutions, looser for coarser grids."""
    base = {2: 5e-3, 3: 2e-2, 4: 5e-2}[n]
    return base * max(1.0, DEFAULT_RESOLUTION[n] / resolution)
