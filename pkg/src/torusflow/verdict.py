from dataclasses import dataclass, field
from typing import Any


@dataclass
class Verdict:
    """Outcome of a verification routine.

    Failures are data, not exceptions: ``passed`` is False and
    ``witnesses`` holds whatever made the check fail.
    """

    name: str
    passed: bool
    max_violation: float = 0.0
    witnesses: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        self.passed = bool(self.passed)
        self.max_violation = float(self.max_violation)

    def __bool__(self):
        return self.passed

    def to_json(self) -> dict[str, Any]:
        out = {
            "pass": bool(self.passed),
            "max_violation": float(self.max_violation),
            "witnesses": list(self.witnesses),
        }
        if self.details:
            out["details"] = self.details
        return out
