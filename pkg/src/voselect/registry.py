"""Registry of partners and services: competence descriptions (4-C model),
service descriptions, structured search, and requirement conformance."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .values import (
    NUMBER,
    AttributeValue,
    MalformedValueError,
    UnitMismatchError,
    discrete_degree,
    satisfaction_degree,
)

PARTNER = "partner"
SERVICE = "service"


class RegistryError(ValueError):
    pass


class DuplicateIdError(RegistryError):
    pass


class DanglingReferenceError(RegistryError):
    pass


class MalformedQueryError(RegistryError):
    pass


class MalformedRequirementError(RegistryError):
    pass


@dataclass
class Element:
    """A partner (organization) or service registered in the breeding environment."""

    id: str
    kind: str
    name: str = ""
    provider_id: Optional[str] = None
    attributes: Dict[str, AttributeValue] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in (PARTNER, SERVICE):
            raise RegistryError(f"unknown element kind {self.kind!r}")
        if self.kind == PARTNER and self.provider_id is not None:
            raise RegistryError("partner elements must not carry a provider_id")
        if self.kind == SERVICE and self.provider_id is None:
            raise RegistryError("service elements require a provider_id")

    def to_json(self) -> dict:
        doc = {"id": self.id, "kind": self.kind, "name": self.name,
               "attributes": {k: v.to_json() for k, v in sorted(self.attributes.items())}}
        if self.provider_id is not None:
            doc["provider_id"] = self.provider_id
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "Element":
        return cls(
            id=doc["id"],
            kind=doc["kind"],
            name=doc.get("name", ""),
            provider_id=doc.get("provider_id"),
            attributes={k: AttributeValue.from_json(v)
                        for k, v in doc.get("attributes", {}).items()},
        )


@dataclass
class CompetenceRecord:
    """4-C description of a partner: competence, capability, cost, conspicuity."""

    owner_id: str
    competence_name: str
    capabilities: Dict[str, AttributeValue] = field(default_factory=dict)
    cost: Optional[AttributeValue] = None
    conspicuity: List[Tuple[str, str]] = field(default_factory=list)

    def __post_init__(self):
        for name, cap in self.capabilities.items():
            if cap.kind != NUMBER:
                raise RegistryError(f"capability {name!r} must be numeric")
            if cap.value < 0:
                raise RegistryError(f"capability {name!r} must be non-negative")

    def to_json(self) -> dict:
        return {
            "owner_id": self.owner_id,
            "competence_name": self.competence_name,
            "capabilities": {k: v.to_json() for k, v in sorted(self.capabilities.items())},
            "cost": self.cost.to_json() if self.cost else None,
            "conspicuity": [{"reference": r, "issued": d} for r, d in self.conspicuity],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "CompetenceRecord":
        return cls(
            owner_id=doc["owner_id"],
            competence_name=doc["competence_name"],
            capabilities={k: AttributeValue.from_json(v)
                          for k, v in doc.get("capabilities", {}).items()},
            cost=AttributeValue.from_json(doc["cost"]) if doc.get("cost") else None,
            conspicuity=[(e["reference"], e["issued"]) for e in doc.get("conspicuity", [])],
        )


@dataclass
class ServiceDescription:
    """Functional and non-functional attributes of a registered service."""

    service_id: str
    functional: Dict[str, AttributeValue] = field(default_factory=dict)
    non_functional: Dict[str, AttributeValue] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "service_id": self.service_id,
            "functional": {k: v.to_json() for k, v in sorted(self.functional.items())},
            "non_functional": {k: v.to_json() for k, v in sorted(self.non_functional.items())},
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ServiceDescription":
        return cls(
            service_id=doc["service_id"],
            functional={k: AttributeValue.from_json(v)
                        for k, v in doc.get("functional", {}).items()},
            non_functional={k: AttributeValue.from_json(v)
                            for k, v in doc.get("non_functional", {}).items()},
        )


_OPS = {"eq", "ne", "lt", "le", "gt", "ge", "contains"}


@dataclass(frozen=True)
class Predicate:
    """One attribute condition; a query is a conjunction of predicates."""

    path: str
    op: str
    value: AttributeValue

    def __post_init__(self):
        if self.op not in _OPS:
            raise MalformedQueryError(f"unknown predicate operator {self.op!r}")

    def matches(self, observed: AttributeValue) -> bool:
        if self.op in ("lt", "le", "gt", "ge"):
            if observed.kind != NUMBER or self.value.kind != NUMBER:
                return False
            observed.check_comparable(self.value)
            a, b = observed.value, self.value.value
            return {"lt": a < b, "le": a <= b, "gt": a > b, "ge": a >= b}[self.op]
        if self.op == "eq":
            return observed.value == self.value.value
        if self.op == "ne":
            return observed.value != self.value.value
        if self.op == "contains":
            if observed.kind == "list":
                return any(item.value == self.value.value for item in observed.value)
            if isinstance(observed.value, str) and isinstance(self.value.value, str):
                return self.value.value in observed.value
            return False
        raise MalformedQueryError(self.op)

    def to_json(self) -> dict:
        return {"path": self.path, "op": self.op, "value": self.value.to_json()}

    @classmethod
    def from_json(cls, doc: dict) -> "Predicate":
        try:
            return cls(doc["path"], doc["op"], AttributeValue.from_json(doc["value"]))
        except (KeyError, TypeError, MalformedValueError) as exc:
            raise MalformedQueryError(f"bad predicate document: {exc}") from exc


Description = Union[CompetenceRecord, ServiceDescription]

# Event listener signature: (event_type, subject_id)
Listener = Callable[[str, str], None]


class Registry:
    """Document store keyed by element id; many readers, serialized writers."""

    def __init__(self):
        self.elements: Dict[str, Element] = {}
        self.competences: Dict[str, List[CompetenceRecord]] = {}
        self.services: Dict[str, List[ServiceDescription]] = {}
        self._listeners: List[Listener] = []

    # -- event wiring -------------------------------------------------------

    def add_listener(self, listener: Listener) -> None:
        self._listeners.append(listener)

    def _emit(self, event_type: str, subject_id: str) -> None:
        for listener in self._listeners:
            listener(event_type, subject_id)

    # -- mutation -----------------------------------------------------------

    def register_element(self, element: Element,
                         descriptions: Sequence[Description] = ()) -> str:
        if element.id in self.elements:
            raise DuplicateIdError(f"element {element.id!r} already registered")
        if element.kind == SERVICE:
            provider = self.elements.get(element.provider_id)
            if provider is None or provider.kind != PARTNER:
                raise DanglingReferenceError(
                    f"service {element.id!r} references unknown partner "
                    f"{element.provider_id!r}")
        self.elements[element.id] = element
        self.competences.setdefault(element.id, [])
        self.services.setdefault(element.id, [])
        for desc in descriptions:
            self.add_description(desc, _emit=False)
        self._emit("element_registered", element.id)
        return element.id

    def add_description(self, desc: Description, _emit: bool = True) -> None:
        if isinstance(desc, CompetenceRecord):
            owner = self.elements.get(desc.owner_id)
            if owner is None or owner.kind != PARTNER:
                raise DanglingReferenceError(
                    f"competence record references unknown partner {desc.owner_id!r}")
            self.competences[desc.owner_id].append(desc)
            subject = desc.owner_id
        elif isinstance(desc, ServiceDescription):
            svc = self.elements.get(desc.service_id)
            if svc is None or svc.kind != SERVICE:
                raise DanglingReferenceError(
                    f"service description references unknown service {desc.service_id!r}")
            self.services[desc.service_id].append(desc)
            subject = desc.service_id
        else:
            raise RegistryError(f"unknown description type {type(desc).__name__}")
        if _emit:
            self._emit("element_updated", subject)

    # -- attribute resolution ----------------------------------------------

    def resolve(self, element_id: str, path: str) -> List[AttributeValue]:
        """All values the dotted path resolves to across the element's documents."""
        element = self.elements[element_id]
        head, _, rest = path.partition(".")
        found: List[AttributeValue] = []
        if head == "attributes" and rest:
            val = element.attributes.get(rest)
            if val is not None:
                found.append(val)
        elif head == "competence_name":
            for rec in self.competences.get(element_id, ()):
                found.append(AttributeValue("text", rec.competence_name))
        elif head == "capabilities" and rest:
            for rec in self.competences.get(element_id, ()):
                val = rec.capabilities.get(rest)
                if val is not None:
                    found.append(val)
        elif head == "cost" and not rest:
            for rec in self.competences.get(element_id, ()):
                if rec.cost is not None:
                    found.append(rec.cost)
            for desc in self.services.get(element_id, ()):
                val = desc.non_functional.get("cost")
                if val is not None:
                    found.append(val)
        elif head in ("functional", "non_functional") and rest:
            for desc in self.services.get(element_id, ()):
                val = getattr(desc, head).get(rest)
                if val is not None:
                    found.append(val)
        return found

    # -- search -------------------------------------------------------------

    def search(self, predicates: Sequence[Predicate]) -> List[Element]:
        """Elements satisfying every predicate, ordered by id."""
        out = []
        for eid in sorted(self.elements):
            if all(self._element_matches(eid, p) for p in predicates):
                out.append(self.elements[eid])
        return out

    def _element_matches(self, eid: str, pred: Predicate) -> bool:
        return any(pred.matches(v) for v in self.resolve(eid, pred.path))

    # -- conformance ---------------------------------------------------------

    def evaluate_conformance(self, element: Element, role) -> float:
        """Weighted mean of per-requirement satisfaction degrees; 1.0 if the
        role has no requirements. A mandatory requirement whose attribute is
        absent scores 0; optional ones drop out of the mean."""
        degrees: List[Tuple[float, float]] = []  # (weight, degree)
        for req in role.requirements:
            degree = self.requirement_degree(element, req)
            if degree is None:
                continue
            degrees.append((req.weight, degree))
        if not degrees:
            return 1.0
        total = sum(w for w, _ in degrees)
        return sum(w * d for w, d in degrees) / total

    def requirement_degree(self, element: Element, req) -> Optional[float]:
        """Degree in [0, 1] for one requirement; None when optional and absent."""
        if req.weight <= 0:
            raise MalformedRequirementError("requirement weight must be positive")
        observed = self.resolve(element.id, req.path)
        if not observed:
            return 0.0 if req.mandatory else None
        if req.optimal.kind == NUMBER:
            if req.reject is None:
                raise MalformedRequirementError(
                    f"numeric requirement on {req.path!r} needs a reject value")
            req.optimal.check_comparable(req.reject)
            best = 0.0
            for val in observed:
                if val.kind != NUMBER:
                    continue
                val.check_comparable(req.optimal)
                best = max(best, satisfaction_degree(
                    val.value, req.optimal.value, req.reject.value))
            return best
        return max((discrete_degree(v, req.optimal) for v in observed), default=0.0)

    # -- persistence ---------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "elements": [self.elements[k].to_json() for k in sorted(self.elements)],
            "competences": [rec.to_json() for k in sorted(self.competences)
                            for rec in self.competences[k]],
            "services": [desc.to_json() for k in sorted(self.services)
                         for desc in self.services[k]],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "Registry":
        reg = cls()
        # partners before services so provider references resolve
        elems = [Element.from_json(e) for e in doc.get("elements", [])]
        for el in sorted(elems, key=lambda e: e.kind != PARTNER):
            reg.register_element(el)
        for rec in doc.get("competences", []):
            reg.add_description(CompetenceRecord.from_json(rec), _emit=False)
        for desc in doc.get("services", []):
            reg.add_description(ServiceDescription.from_json(desc), _emit=False)
        return reg

    def copy(self) -> "Registry":
        dup = Registry()
        dup.elements = copy.deepcopy(self.elements)
        dup.competences = copy.deepcopy(self.competences)
        dup.services = copy.deepcopy(self.services)
        return dup
