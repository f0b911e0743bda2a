"""Small value types shared by the check-style operations."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional

SLACK = 1e-9


@dataclass(frozen=True)
class Check:
    """One inequality lhs <= rhs, with the witness that made it tightest."""
    name: str
    lhs: float
    rhs: float
    slack: float = SLACK
    witness: Optional[dict] = None

    @property
    def passed(self) -> bool:
        if math.isnan(self.lhs) or math.isnan(self.rhs):
            return False
        return self.lhs <= self.rhs * (1.0 + self.slack) or self.lhs <= self.rhs

    @property
    def ratio(self) -> float:
        if self.rhs == 0:
            return math.inf if self.lhs > 0 else 0.0
        return self.lhs / self.rhs

    def to_dict(self) -> dict:
        d = {"inequality": self.name, "lhs": self.lhs, "rhs": self.rhs,
             "slack": self.slack, "passed": self.passed}
        if self.witness is not None:
            d["witness"] = self.witness
        return d


@dataclass
class CheckList:
    checks: list = field(default_factory=list)

    def add(self, name: str, lhs: float, rhs: float, slack: float = SLACK,
            witness: Any = None) -> Check:
        c = Check(name, float(lhs), float(rhs), slack, witness)
        self.checks.append(c)
        return c

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def violations(self) -> list:
        """Failed checks as dicts (the form the CLI reports)."""
        return [c.to_dict() for c in self.checks if not c.passed]

    def to_list(self) -> list:
        return [c.to_dict() for c in self.checks]
