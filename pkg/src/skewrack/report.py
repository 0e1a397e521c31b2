"""Check reports and the exception hierarchy shared by every module."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional


class StructureError(ValueError):
    """Malformed tables, missing optional structure, or out-of-range sizes."""


class PreconditionError(ValueError):
    """An operation was called on input violating its precondition.

    ``witness`` carries the offending elements when there is one.
    """

    def __init__(self, message: str, witness: Any = None):
        super().__init__(message)
        self.witness = witness


class InnEvenOverflow(RuntimeError):
    """Closure of the even inner group exceeded its element cap."""

    def __init__(self, cap: int, reached: int):
        super().__init__(f"group closure exceeded cap={cap} (reached {reached} elements)")
        self.cap = cap
        self.reached = reached


class BudgetExceeded(RuntimeError):
    """The coloring solver ran out of propagation steps."""

    def __init__(self, budget: int, steps: int, found: int):
        super().__init__(
            f"propagation budget {budget} exceeded after {steps} steps "
            f"({found} colorings found so far)"
        )
        self.budget = budget
        self.steps = steps
        self.found = found


@dataclass(frozen=True)
class CheckReport:
    passed: bool
    axiom: Optional[str] = None
    counterexample: Optional[tuple] = None
    detail: str = ""

    def __post_init__(self):
        if self.passed != (self.counterexample is None):
            raise ValueError("counterexample must be present exactly when the check fails")

    def __bool__(self) -> bool:
        return self.passed

    @classmethod
    def ok(cls, detail: str = "") -> "CheckReport":
        return cls(True, detail=detail)

    @classmethod
    def fail(cls, axiom: str, counterexample: tuple, detail: str = "") -> "CheckReport":
        return cls(False, axiom, tuple(counterexample), detail)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "axiom": self.axiom,
            "counterexample": None if self.counterexample is None else [_plain(c) for c in self.counterexample],
            "detail": self.detail,
        }


def _plain(value):
    if hasattr(value, "tolist"):
        return value.tolist()
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    return value
