from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class CheckReport:
    """Outcome of a numerical invariant check.

    ``residual`` is the worst violation found (for threshold-style checks such
    as the phi condition it is the minimum of the tested quantity instead);
    ``where`` optionally locates it, e.g. a 1-based basis triple.
    """

    name: str
    passed: bool
    residual: float
    tolerance: float
    where: tuple | None = None
    detail: str = ""

    def __bool__(self):
        return self.passed
