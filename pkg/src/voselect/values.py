"""Attribute values with unit tags, and the optimal/reject satisfaction degree."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional


class UnitMismatchError(ValueError):
    """Numeric comparison attempted between values with different unit tags."""


class MalformedValueError(ValueError):
    """Attribute value document does not follow the {type, value, unit?} shape."""


NUMBER = "number"
TEXT = "text"
BOOL = "bool"
ENUM = "enum"
LIST = "list"

_KINDS = {NUMBER, TEXT, BOOL, ENUM, LIST}


@dataclass(frozen=True)
class AttributeValue:
    """A typed attribute value; numbers carry an optional unit tag."""

    kind: str
    value: Any
    unit: Optional[str] = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise MalformedValueError(f"unknown value kind {self.kind!r}")
        if self.kind != NUMBER and self.unit is not None:
            raise MalformedValueError("unit tags only apply to numbers")
        if self.kind == NUMBER and not isinstance(self.value, (int, float)):
            raise MalformedValueError("number value must be numeric")

    def check_comparable(self, other: "AttributeValue") -> None:
        if self.kind == NUMBER and other.kind == NUMBER and self.unit != other.unit:
            raise UnitMismatchError(
                f"cannot compare {self.unit!r} against {other.unit!r}"
            )

    def to_json(self) -> dict:
        doc = {"type": self.kind, "value": self.value}
        if self.kind == LIST:
            doc["value"] = [item.to_json() for item in self.value]
        if self.unit is not None:
            doc["unit"] = self.unit
        return doc

    @classmethod
    def from_json(cls, doc: Any) -> "AttributeValue":
        if not isinstance(doc, dict) or "type" not in doc or "value" not in doc:
            raise MalformedValueError(f"bad attribute value document: {doc!r}")
        kind = doc["type"]
        value = doc["value"]
        if kind == LIST:
            value = [cls.from_json(item) for item in value]
        return cls(kind=kind, value=value, unit=doc.get("unit"))


def num(value: float, unit: Optional[str] = None) -> AttributeValue:
    return AttributeValue(NUMBER, value, unit)


def text(value: str) -> AttributeValue:
    return AttributeValue(TEXT, value)


def boolean(value: bool) -> AttributeValue:
    return AttributeValue(BOOL, value)


def enum(token: str) -> AttributeValue:
    return AttributeValue(ENUM, token)


def satisfaction_degree(observed: float, optimal: float, reject: float) -> float:
    """Linear degree anchored at reject=0 and optimal=1, clamped to [0, 1].

    Direction is encoded by the sign of (optimal - reject): with optimal < reject
    smaller observed values score higher.
    """
    if optimal == reject:
        raise ValueError("optimal and reject must differ for numeric requirements")
    raw = (observed - reject) / (optimal - reject)
    return max(0.0, min(1.0, raw))


def discrete_degree(observed: AttributeValue, optimal: AttributeValue) -> float:
    """Boolean/enum/text requirements map to {0, 1} by equality with the optimal."""
    return 1.0 if observed.value == optimal.value else 0.0
