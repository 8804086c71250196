"""Typed, attributed relation graph over registered elements, and evaluation
of social requirements against concrete role assignments."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Tuple

from .registry import Element, Registry
from .values import NUMBER, AttributeValue, satisfaction_degree

DIRECTED = "directed"
EITHER = "either"


class SocialGraphError(ValueError):
    pass


class DanglingEndpointError(SocialGraphError):
    pass


class IncompleteAssignmentError(SocialGraphError):
    pass


@dataclass
class Relation:
    """A typed edge between two registered elements, e.g. past_cooperation."""

    id: str
    relation_type: str
    source_id: str
    target_id: str
    attributes: Dict[str, AttributeValue] = field(default_factory=dict)

    def __post_init__(self):
        if not self.relation_type:
            raise SocialGraphError("relation_type must be non-empty")

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "type": self.relation_type,
            "source": self.source_id,
            "target": self.target_id,
            "attributes": {k: v.to_json() for k, v in sorted(self.attributes.items())},
        }

    @classmethod
    def from_json(cls, doc: dict) -> "Relation":
        return cls(
            id=doc["id"],
            relation_type=doc["type"],
            source_id=doc["source"],
            target_id=doc["target"],
            attributes={k: AttributeValue.from_json(v)
                        for k, v in doc.get("attributes", {}).items()},
        )


@dataclass
class SocialRequirement:
    """A required relation between the elements assigned to two roles."""

    id: str
    between: Tuple[str, str]
    relation_type: str
    direction: str = DIRECTED
    # (attribute name, optimal, reject); optional — bare existence otherwise
    attribute_condition: Optional[Tuple[str, float, float]] = None
    weight: float = 1.0

    def __post_init__(self):
        if self.direction not in (DIRECTED, EITHER):
            raise SocialGraphError(f"unknown direction {self.direction!r}")
        if self.weight <= 0:
            raise SocialGraphError("requirement weight must be positive")

    def to_json(self) -> dict:
        doc = {
            "id": self.id,
            "type": "social",
            "between": list(self.between),
            "relation_type": self.relation_type,
            "direction": self.direction,
            "weight": self.weight,
        }
        if self.attribute_condition:
            name, optimal, reject = self.attribute_condition
            doc["attribute_condition"] = {
                "attribute": name, "optimal": optimal, "reject": reject}
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "SocialRequirement":
        cond = None
        if doc.get("attribute_condition"):
            c = doc["attribute_condition"]
            cond = (c["attribute"], c["optimal"], c["reject"])
        return cls(
            id=doc["id"],
            between=(doc["between"][0], doc["between"][1]),
            relation_type=doc["relation_type"],
            direction=doc.get("direction", DIRECTED),
            attribute_condition=cond,
            weight=doc.get("weight", 1.0),
        )


@dataclass
class SocialNetworkSchema:
    """Roles plus the social requirements among them."""

    roles: List[str] = field(default_factory=list)
    requirements: List[SocialRequirement] = field(default_factory=list)

    def validate(self) -> List[str]:
        problems = []
        if len(set(self.roles)) != len(self.roles):
            problems.append("duplicate role names in schema")
        for req in self.requirements:
            for role in req.between:
                if role not in self.roles:
                    problems.append(
                        f"social requirement {req.id!r} names unknown role {role!r}")
        return problems

    def to_json(self) -> dict:
        return {"roles": list(self.roles),
                "requirements": [r.to_json() for r in self.requirements]}

    @classmethod
    def from_json(cls, doc: dict) -> "SocialNetworkSchema":
        return cls(
            roles=list(doc.get("roles", [])),
            requirements=[SocialRequirement.from_json(r)
                          for r in doc.get("requirements", [])],
        )


@dataclass
class SchemaEvaluation:
    degree: float
    breakdown: Dict[str, float]  # requirement id -> degree

    def to_json(self) -> dict:
        return {"degree": self.degree, "breakdown": dict(sorted(self.breakdown.items()))}


class SocialGraph:
    """Relation store with the same reader/writer contract as the registry."""

    def __init__(self, registry: Optional[Registry] = None):
        self.relations: Dict[str, Relation] = {}
        self._registry = registry
        self._listeners: List[Callable[[str, str], None]] = []

    def add_listener(self, listener: Callable[[str, str], None]) -> None:
        self._listeners.append(listener)

    def add_relation(self, relation: Relation) -> str:
        if relation.id in self.relations:
            raise SocialGraphError(f"relation {relation.id!r} already present")
        if self._registry is not None:
            for endpoint in (relation.source_id, relation.target_id):
                if endpoint not in self._registry.elements:
                    raise DanglingEndpointError(
                        f"relation endpoint {endpoint!r} is not registered")
        self.relations[relation.id] = relation
        for listener in self._listeners:
            listener("relation_added", relation.id)
        return relation.id

    def relations_of_type(self, relation_type: str) -> List[Relation]:
        return [self.relations[k] for k in sorted(self.relations)
                if self.relations[k].relation_type == relation_type]

    def relations_between(self, relation_type: str, a: str, b: str,
                          direction: str = DIRECTED) -> List[Relation]:
        out = []
        for rel in self.relations_of_type(relation_type):
            forward = rel.source_id == a and rel.target_id == b
            backward = rel.source_id == b and rel.target_id == a
            if forward or (direction == EITHER and backward):
                out.append(rel)
        return out

    def evaluate_social_requirement(self, req: SocialRequirement,
                                    assignment: Mapping[str, Element]) -> float:
        """0 with no matching relation; else 1, or the best attribute-condition
        degree among matching relations."""
        role_a, role_b = req.between
        for role in (role_a, role_b):
            if role not in assignment:
                raise IncompleteAssignmentError(f"assignment missing role {role!r}")
        a, b = assignment[role_a].id, assignment[role_b].id
        matching = self.relations_between(req.relation_type, a, b, req.direction)
        if not matching:
            return 0.0
        if req.attribute_condition is None:
            return 1.0
        name, optimal, reject = req.attribute_condition
        best = 0.0
        for rel in matching:
            val = rel.attributes.get(name)
            if val is None or val.kind != NUMBER:
                continue
            best = max(best, satisfaction_degree(val.value, optimal, reject))
        return best

    def evaluate_schema(self, schema: SocialNetworkSchema,
                        assignment: Mapping[str, Element]) -> SchemaEvaluation:
        """Weighted mean of requirement degrees, with per-requirement breakdown."""
        for role in schema.roles:
            if role not in assignment:
                raise IncompleteAssignmentError(f"assignment missing role {role!r}")
        if not schema.requirements:
            return SchemaEvaluation(degree=1.0, breakdown={})
        breakdown = {}
        total_weight = sum(r.weight for r in schema.requirements)
        acc = 0.0
        for req in schema.requirements:
            d = self.evaluate_social_requirement(req, assignment)
            breakdown[req.id] = d
            acc += req.weight * d
        return SchemaEvaluation(degree=acc / total_weight, breakdown=breakdown)

    def to_json(self) -> dict:
        return {"relations": [self.relations[k].to_json()
                              for k in sorted(self.relations)]}

    @classmethod
    def from_json(cls, doc: dict, registry: Optional[Registry] = None) -> "SocialGraph":
        graph = cls(registry)
        for rel in doc.get("relations", []):
            graph.add_relation(Relation.from_json(rel))
        return graph

    def copy(self, registry: Optional[Registry] = None) -> "SocialGraph":
        dup = SocialGraph(registry if registry is not None else self._registry)
        dup.relations = copy.deepcopy(self.relations)
        return dup
