from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class PropertyReport:
    """Named property checks; ``None`` marks a check that does not apply."""

    checks: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v is not False for v in self.checks.values())

    @property
    def failures(self) -> list:
        return [name for name, v in self.checks.items() if v is False]

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checks": dict(self.checks),
                "details": dict(self.details)}
