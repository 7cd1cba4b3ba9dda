"""Structured pass/fail evidence shared by every checking operation."""

from __future__ import annotations

from dataclasses import dataclass, field

PASS = "pass"
FAIL = "fail"
WARN = "warn"
INCONCLUSIVE = "inconclusive"

_STATUSES = (PASS, FAIL, WARN, INCONCLUSIVE)


@dataclass(frozen=True)
class CheckItem:
    """One named condition with its numeric evidence.

    value holds whatever number(s) the check produced; tolerance is the
    band the value was held to, when one applies.  warn counts as a pass
    (degenerate but admissible input); inconclusive does not.
    """

    name: str
    status: str
    value: object = None
    tolerance: float | None = None
    detail: str = ""

    def __post_init__(self):
        if self.status not in _STATUSES:
            raise ValueError(f"unknown status {self.status!r}")

    @property
    def passed(self) -> bool:
        return self.status in (PASS, WARN)

    def to_dict(self) -> dict:
        value = self.value
        if hasattr(value, "tolist"):
            value = value.tolist()
        return {
            "name": self.name,
            "status": self.status,
            "value": value,
            "tolerance": self.tolerance,
            "detail": self.detail,
        }


@dataclass(frozen=True)
class CheckReport:
    """An ordered collection of check items with an overall verdict."""

    items: tuple[CheckItem, ...] = field(default_factory=tuple)

    @property
    def overall_pass(self) -> bool:
        return all(item.passed for item in self.items)

    def item(self, name: str) -> CheckItem:
        for it in self.items:
            if it.name == name:
                return it
        raise KeyError(name)

    def __contains__(self, name: str) -> bool:
        return any(it.name == name for it in self.items)

    def failing(self) -> tuple[CheckItem, ...]:
        return tuple(it for it in self.items if not it.passed)

    def merged(self, *others: "CheckReport") -> "CheckReport":
        items = list(self.items)
        for rep in others:
            items.extend(rep.items)
        return CheckReport(tuple(items))

    def to_dict(self) -> dict:
        return {
            "overall": PASS if self.overall_pass else FAIL,
            "items": [it.to_dict() for it in self.items],
        }


def item(name, passed, value=None, tolerance=None, detail="") -> CheckItem:
    """Shorthand for a binary pass/fail item."""
    return CheckItem(name, PASS if passed else FAIL, value, tolerance, detail)
