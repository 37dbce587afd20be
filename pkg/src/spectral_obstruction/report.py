"""Pass/fail records shared by the two verification pipelines."""
from __future__ import annotations

from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class Check:
    """One verified inequality ``value < bound`` (or ``value >= bound``).

    ``margin`` is oriented so that positive means the inequality holds.  A strict
    check passes only when the margin exceeds ``tolerance``, so a tie (or a
    difference below numerical resolution) is never reported as a pass.
    """

    name: str
    value: float
    bound: float
    margin: float
    tolerance: float
    strict: bool = True

    @property
    def passed(self) -> bool:
        if self.strict:
            return self.margin > self.tolerance
        return self.margin >= -self.tolerance

    def as_dict(self) -> dict:
        out = asdict(self)
        out["passed"] = self.passed
        return out


def upper(name: str, value: float, bound: float, tolerance: float, strict: bool = True) -> Check:
    """Check ``value < bound``."""
    return Check(name, float(value), float(bound), float(bound - value), float(tolerance), strict)


def lower(name: str, value: float, bound: float, tolerance: float, strict: bool = False) -> Check:
    """Check ``value >= bound``."""
    return Check(name, float(value), float(bound), float(value - bound), float(tolerance), strict)


def first_failure(checks) -> str | None:
    for c in checks:
        if not c.passed:
            return c.name
    return None
