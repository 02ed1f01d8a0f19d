from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

SCHEMA = "gammadelta/1"


@dataclass
class GradedEntry:
    index: int
    rank: int
    expected: int
    generators: list = field(default_factory=list)
    passed: bool = False
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        out = {
            "index": self.index,
            "rank": self.rank,
            "expected": self.expected,
            "pass": self.passed,
            "generators": [str(g) for g in self.generators],
        }
        out.update(self.extra)
        return out


@dataclass
class FiltrationReport:
    """Per-index graded ranks, generators and pass flags of a filtration check."""

    name: str
    entries: list = field(default_factory=list)
    matrix: Any = None
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries) and all(self.checks.values())

    def entry(self, index: int) -> GradedEntry:
        for e in self.entries:
            if e.index == index:
                return e
        raise KeyError(index)

    def to_json(self) -> dict[str, Any]:
        out = {
            "name": self.name,
            "pass": self.passed,
            "entries": [e.to_json() for e in self.entries],
        }
        if self.checks:
            out["checks"] = dict(self.checks)
        if self.matrix is not None:
            out["matrix"] = self.matrix
        return out
