"""Slot-level simulation of saturated slotted Aloha on the collision channel."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .model import ControlLike, ControlVector, rates_from_control

CHUNK = 1 << 16


@dataclass(frozen=True)
class SimReport:
    p: tuple
    slots: int
    seed: int
    success_counts: tuple
    empirical_rates: tuple
    idle: int
    collision: int
    success: int

    def to_dict(self) -> dict:
        return {
            "p": list(self.p), "slots": self.slots, "seed": self.seed,
            "success_counts": list(self.success_counts),
            "empirical_rates": list(self.empirical_rates),
            "idle": self.idle, "collision": self.collision, "success": self.success,
        }


def simulate_saturated(p: ControlLike, slots: int, seed: int) -> SimReport:
    """Every user always has a packet and transmits with its own probability per slot.

    Each user draws from an independent PCG64 stream keyed by ``(seed, user)``,
    so the outcome does not depend on how slots are batched.
    """
    p = p if isinstance(p, ControlVector) else ControlVector(p)
    if isinstance(slots, bool) or int(slots) != slots or slots < 1:
        raise DomainError("slots must be a positive integer")
    slots = int(slots)
    n = p.n
    streams = [np.random.default_rng([seed, i]) for i in range(n)]
    wins = np.zeros(n, dtype=np.int64)
    idle = collision = 0
    done = 0
    while done < slots:
        m = min(CHUNK, slots - done)
        tx = np.empty((n, m), dtype=bool)
        for i, rng in enumerate(streams):
            tx[i] = rng.random(m) < p.p[i]
        active = tx.sum(axis=0)
        lone = active == 1
        wins += (tx & lone).sum(axis=1)
        idle += int(np.count_nonzero(active == 0))
        collision += int(np.count_nonzero(active > 1))
        done += m
    success = int(wins.sum())
    return SimReport(
        p=tuple(float(v) for v in p.p), slots=slots, seed=int(seed),
        success_counts=tuple(int(w) for w in wins),
        empirical_rates=tuple(float(w) / slots for w in wins),
        idle=idle, collision=collision, success=success,
    )


@dataclass(frozen=True)
class SimCheck:
    """Deviations of a simulation from the rate map, in standard errors."""

    per_user_z: tuple
    total_z: float
    partition_ok: bool

    def passed(self, user_sigmas: float = 4.0, total_sigmas: float = 3.0) -> bool:
        return (self.partition_ok and all(abs(z) <= user_sigmas for z in self.per_user_z)
                and abs(self.total_z) <= total_sigmas)

    def to_dict(self) -> dict:
        return {"per_user_z": list(self.per_user_z), "total_z": self.total_z,
                "partition_ok": self.partition_ok}


def _z(observed: float, expected: float, slots: int) -> float:
    sigma = math.sqrt(expected * (1.0 - expected) / slots)
    if sigma == 0.0:
        return 0.0 if observed == expected else math.inf
    return (observed - expected) / sigma


def check_simulation(report: SimReport, target_total: float | None = None) -> SimCheck:
    """Compare empirical rates with ``x(p)`` and the total with ``target_total`` (default ``T(x(p))``)."""
    x = rates_from_control(report.p).x
    expected_total = float(x.sum()) if target_total is None else target_total
    per_user = tuple(_z(e, float(xi), report.slots) for e, xi in zip(report.empirical_rates, x))
    total = _z(report.success / report.slots, expected_total, report.slots)
    partition = (report.idle + report.collision + report.success == report.slots
                 and sum(report.success_counts) == report.success)
    return SimCheck(per_user, total, partition)
