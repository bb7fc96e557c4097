"""Throughput grids ``lo:hi:step`` over half-open intervals ``[lo, hi)``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .errors import DomainError


@dataclass(frozen=True)
class Grid:
    lo: float
    hi: float
    step: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi) and math.isfinite(self.step)):
            raise DomainError("grid bounds must be finite")
        if not self.hi > self.lo:
            raise DomainError(f"empty grid: hi={self.hi!r} <= lo={self.lo!r}")
        if not self.step > 0:
            raise DomainError("grid step must be positive")

    @classmethod
    def parse(cls, text: str) -> "Grid":
        parts = text.split(":")
        if len(parts) != 3:
            raise DomainError(f"grid must be lo:hi:step, got {text!r}")
        try:
            lo, hi, step = (float(s) for s in parts)
        except ValueError:
            raise DomainError(f"grid must be lo:hi:step, got {text!r}") from None
        return cls(lo, hi, step)

    def points(self, inject: Iterable[float] = ()) -> list[float]:
        """Grid members ``lo + i*step < hi`` plus any injected values in range."""
        count = math.ceil((self.hi - self.lo) / self.step) + 1
        pts = {self.lo + i * self.step for i in range(count)}
        pts.update(inject)
        return sorted(v for v in pts if self.lo <= v < self.hi)

    def __str__(self):
        return f"{self.lo!r}:{self.hi!r}:{self.step!r}"
