"""VO specification: roles and their requirements, process structure, social
protocol, fitness definitions, thresholds — validated against the
aspect/phase applicability matrix."""

from __future__ import annotations

import graphlib
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from .indicators import IndicatorError, IndicatorStore
from .registry import PARTNER, SERVICE, Element, Registry
from .social import SocialGraph, SocialNetworkSchema, SocialRequirement
from .values import AttributeValue

# Aspects a requirement may attach to.
ASPECT_PARTNER = "partner"
ASPECT_SERVICE = "service"
ASPECT_PARTNER_SUBSET = "partner_subset"
ASPECT_SERVICE_SUBSET = "service_subset"
ASPECT_PROCESS = "process"

# Non-empty cells of the aspect/phase applicability matrix:
# (requirement type, aspect) -> phase in which it is enforced.
ALLOWED_CELLS = {
    ("role", ASPECT_PARTNER): 2,
    ("role", ASPECT_SERVICE): 2,
    ("social", ASPECT_PARTNER_SUBSET): 3,
    ("social", ASPECT_SERVICE_SUBSET): 3,
    ("performance", ASPECT_SERVICE_SUBSET): 4,
    ("performance", ASPECT_PROCESS): 4,
}


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class Violation:
    category: str
    message: str

    def to_json(self) -> dict:
        return {"category": self.category, "message": self.message}


@dataclass
class RoleRequirement:
    """One competence/service-description requirement of a role."""

    path: str
    optimal: AttributeValue
    reject: Optional[AttributeValue] = None
    weight: float = 1.0
    mandatory: bool = True

    def to_json(self) -> dict:
        doc: Dict[str, Any] = {"type": "role", "path": self.path,
                               "optimal": self.optimal.to_json(),
                               "weight": self.weight, "mandatory": self.mandatory}
        if self.reject is not None:
            doc["reject"] = self.reject.to_json()
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "RoleRequirement":
        return cls(
            path=doc["path"],
            optimal=AttributeValue.from_json(doc["optimal"]),
            reject=AttributeValue.from_json(doc["reject"]) if doc.get("reject") else None,
            weight=doc.get("weight", 1.0),
            mandatory=doc.get("mandatory", True),
        )


@dataclass
class Role:
    name: str
    target_kind: str  # partner | service
    requirements: List[RoleRequirement] = field(default_factory=list)
    # requirement documents of the wrong type found in this role's list;
    # kept so validation can report the matrix cell they violate
    misplaced: List[dict] = field(default_factory=list)

    @property
    def aspect(self) -> str:
        return ASPECT_PARTNER if self.target_kind == PARTNER else ASPECT_SERVICE

    def to_json(self) -> dict:
        return {"name": self.name, "target_kind": self.target_kind,
                "requirements": [r.to_json() for r in self.requirements]
                + list(self.misplaced)}

    @classmethod
    def from_json(cls, doc: dict) -> "Role":
        reqs, misplaced = [], []
        for rdoc in doc.get("requirements", []):
            if rdoc.get("type", "role") == "role":
                reqs.append(RoleRequirement.from_json(rdoc))
            else:
                misplaced.append(rdoc)
        return cls(name=doc["name"], target_kind=doc.get("target_kind", PARTNER),
                   requirements=reqs, misplaced=misplaced)


_METRICS = {"process_duration", "subprocess_response_time", "total_cost", "indicator"}


@dataclass
class PerformanceRequirement:
    """One component of the vector-valued performance evaluation."""

    metric: str
    scope: str = "process"  # "process" or a sub-process name
    optimal: float = 0.0
    reject: float = 1.0
    weight: float = 1.0
    indicator: Optional[str] = None  # for metric == "indicator"

    def __post_init__(self):
        if self.metric not in _METRICS:
            raise SpecError(f"unknown performance metric {self.metric!r}")

    @property
    def direction(self) -> str:
        # optimal below reject means smaller values are better
        return "minimize" if self.optimal < self.reject else "maximize"

    @property
    def aspect(self) -> str:
        return ASPECT_PROCESS if self.scope == "process" else ASPECT_SERVICE_SUBSET

    def to_json(self) -> dict:
        doc: Dict[str, Any] = {"type": "performance", "metric": self.metric,
                               "scope": self.scope, "optimal": self.optimal,
                               "reject": self.reject, "weight": self.weight}
        if self.indicator is not None:
            doc["indicator"] = self.indicator
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "PerformanceRequirement":
        return cls(metric=doc["metric"], scope=doc.get("scope", "process"),
                   optimal=doc.get("optimal", 0.0), reject=doc.get("reject", 1.0),
                   weight=doc.get("weight", 1.0), indicator=doc.get("indicator"))


@dataclass
class Activity:
    id: str
    roles: List[str]


@dataclass
class ProcessStructure:
    """Activities, precedence DAG, and named sub-process activity subsets."""

    activities: List[Activity] = field(default_factory=list)
    precedence: List[Tuple[str, str]] = field(default_factory=list)
    sub_processes: Dict[str, List[str]] = field(default_factory=dict)

    def activity_ids(self) -> List[str]:
        return [a.id for a in self.activities]

    def role_names(self) -> set:
        return {r for a in self.activities for r in a.roles}

    def topological_order(self) -> List[str]:
        graph: Dict[str, set] = {a.id: set() for a in self.activities}
        for src, dst in self.precedence:
            graph.setdefault(dst, set()).add(src)
        return list(graphlib.TopologicalSorter(graph).static_order())

    def longest_path(self, durations: Mapping[str, float],
                     subset: Optional[Sequence[str]] = None) -> float:
        """Maximum node-weighted path length through the precedence DAG,
        optionally restricted to the induced subgraph over `subset`."""
        nodes = set(self.activity_ids()) if subset is None else set(subset)
        order = [n for n in self.topological_order() if n in nodes]
        preds: Dict[str, List[str]] = {n: [] for n in order}
        for src, dst in self.precedence:
            if src in nodes and dst in nodes:
                preds[dst].append(src)
        best: Dict[str, float] = {}
        for node in order:
            incoming = max((best[p] for p in preds[node]), default=0.0)
            best[node] = durations[node] + incoming
        return max(best.values(), default=0.0)

    def to_json(self) -> dict:
        return {
            "activities": [{"id": a.id, "roles": list(a.roles)} for a in self.activities],
            "precedence": [list(edge) for edge in self.precedence],
            "sub_processes": {k: list(v) for k, v in sorted(self.sub_processes.items())},
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ProcessStructure":
        return cls(
            activities=[Activity(a["id"], list(a.get("roles", [])))
                        for a in doc.get("activities", [])],
            precedence=[(e[0], e[1]) for e in doc.get("precedence", [])],
            sub_processes={k: list(v)
                           for k, v in doc.get("sub_processes", {}).items()},
        )


@dataclass
class FitnessComponent:
    kind: str  # social_schema | indicator | role_conformance
    weight: float = 1.0
    indicator: Optional[str] = None
    min_value: float = 0.0
    max_value: float = 1.0

    def to_json(self) -> dict:
        doc: Dict[str, Any] = {"kind": self.kind, "weight": self.weight}
        if self.kind == "indicator":
            doc.update(indicator=self.indicator, min=self.min_value, max=self.max_value)
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "FitnessComponent":
        return cls(kind=doc["kind"], weight=doc.get("weight", 1.0),
                   indicator=doc.get("indicator"),
                   min_value=doc.get("min", 0.0), max_value=doc.get("max", 1.0))


DEFAULT_FITNESS = [FitnessComponent(kind="social_schema", weight=1.0)]


@dataclass
class RankingChoice:
    method: str = "weighted_sum"  # weighted_sum | lexicographic | pareto
    weights: Optional[List[float]] = None  # per performance component
    priority: Optional[List[int]] = None  # component order for lexicographic

    def to_json(self) -> dict:
        doc: Dict[str, Any] = {"method": self.method}
        if self.weights is not None:
            doc["weights"] = list(self.weights)
        if self.priority is not None:
            doc["priority"] = list(self.priority)
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "RankingChoice":
        return cls(method=doc.get("method", "weighted_sum"),
                   weights=doc.get("weights"), priority=doc.get("priority"))


@dataclass
class Thresholds:
    phase2_cutoff: float = 0.0
    phase3_fitness: float = 0.0
    phase2_max_candidates: int = 100

    def to_json(self) -> dict:
        return {"phase2_cutoff": self.phase2_cutoff,
                "phase3_fitness": self.phase3_fitness,
                "phase2_max_candidates": self.phase2_max_candidates}

    @classmethod
    def from_json(cls, doc: dict) -> "Thresholds":
        return cls(phase2_cutoff=doc.get("phase2_cutoff", 0.0),
                   phase3_fitness=doc.get("phase3_fitness", 0.0),
                   phase2_max_candidates=doc.get("phase2_max_candidates", 100))


@dataclass
class VOSpecification:
    id: str
    roles: List[Role] = field(default_factory=list)
    process: ProcessStructure = field(default_factory=ProcessStructure)
    schema: SocialNetworkSchema = field(default_factory=SocialNetworkSchema)
    performance_requirements: List[PerformanceRequirement] = field(default_factory=list)
    fitness: List[FitnessComponent] = field(default_factory=lambda: list(DEFAULT_FITNESS))
    ranking: RankingChoice = field(default_factory=RankingChoice)
    thresholds: Thresholds = field(default_factory=Thresholds)
    exclusivity: bool = False
    version: int = 1
    # wrong-type requirement documents found in the schema or performance lists
    misplaced_schema: List[dict] = field(default_factory=list)
    misplaced_performance: List[dict] = field(default_factory=list)

    def role_by_name(self, name: str) -> Optional[Role]:
        for role in self.roles:
            if role.name == name:
                return role
        return None

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "version": self.version,
            "roles": [r.to_json() for r in self.roles],
            "process": self.process.to_json(),
            "schema": {
                "roles": list(self.schema.roles),
                "requirements": [r.to_json() for r in self.schema.requirements]
                + list(self.misplaced_schema),
            },
            "performance_requirements": [p.to_json() for p in self.performance_requirements]
            + list(self.misplaced_performance),
            "fitness": [c.to_json() for c in self.fitness],
            "ranking": self.ranking.to_json(),
            "thresholds": self.thresholds.to_json(),
            "exclusivity": self.exclusivity,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "VOSpecification":
        schema_reqs, misplaced_schema = [], []
        for rdoc in doc.get("schema", {}).get("requirements", []):
            if rdoc.get("type", "social") == "social":
                schema_reqs.append(SocialRequirement.from_json(rdoc))
            else:
                misplaced_schema.append(rdoc)
        perf_reqs, misplaced_perf = [], []
        for pdoc in doc.get("performance_requirements", []):
            if pdoc.get("type", "performance") == "performance":
                perf_reqs.append(PerformanceRequirement.from_json(pdoc))
            else:
                misplaced_perf.append(pdoc)
        fitness = [FitnessComponent.from_json(c) for c in doc.get("fitness", [])]
        return cls(
            id=doc["id"],
            version=doc.get("version", 1),
            roles=[Role.from_json(r) for r in doc.get("roles", [])],
            process=ProcessStructure.from_json(doc.get("process", {})),
            schema=SocialNetworkSchema(
                roles=list(doc.get("schema", {}).get("roles", [])),
                requirements=schema_reqs),
            performance_requirements=perf_reqs,
            fitness=fitness or list(DEFAULT_FITNESS),
            ranking=RankingChoice.from_json(doc.get("ranking", {})),
            thresholds=Thresholds.from_json(doc.get("thresholds", {})),
            exclusivity=doc.get("exclusivity", False),
            misplaced_schema=misplaced_schema,
            misplaced_performance=misplaced_perf,
        )


def _subset_aspect(spec: VOSpecification, role_names: Sequence[str]) -> str:
    kinds = {spec.role_by_name(n).target_kind
             for n in role_names if spec.role_by_name(n) is not None}
    if kinds == {SERVICE}:
        return ASPECT_SERVICE_SUBSET
    return ASPECT_PARTNER_SUBSET


def validate_spec(spec: VOSpecification) -> List[Violation]:
    """All invariant violations; the spec is well-formed iff the list is empty."""
    out: List[Violation] = []

    names = [r.name for r in spec.roles]
    if len(set(names)) != len(names):
        out.append(Violation("duplicate role", "role names must be unique"))

    # aspect/phase matrix: misplaced requirement documents
    for role in spec.roles:
        for doc in role.misplaced:
            out.append(Violation(
                "aspect/phase mismatch",
                f"{doc.get('type')!r} requirement attached to {role.aspect} aspect "
                f"(role {role.name!r}); matrix cell is empty"))
        for req in role.requirements:
            if req.weight <= 0:
                out.append(Violation(
                    "invalid weight",
                    f"requirement on {req.path!r} of role {role.name!r} has "
                    f"non-positive weight"))
            if (req.optimal.kind == "number" and req.reject is not None
                    and req.optimal.value == req.reject.value):
                out.append(Violation(
                    "degenerate interval",
                    f"requirement on {req.path!r} of role {role.name!r} has "
                    f"optimal equal to reject"))
    for doc in spec.misplaced_schema:
        out.append(Violation(
            "aspect/phase mismatch",
            f"{doc.get('type')!r} requirement attached to a role-subset aspect; "
            f"matrix cell is empty"))
    for doc in spec.misplaced_performance:
        out.append(Violation(
            "aspect/phase mismatch",
            f"{doc.get('type')!r} requirement attached to the process aspect; "
            f"matrix cell is empty"))

    # schema integrity
    for problem in spec.schema.validate():
        out.append(Violation("unknown role", problem))
    for schema_role in spec.schema.roles:
        if schema_role not in names:
            out.append(Violation(
                "unknown role", f"schema role {schema_role!r} is not declared"))
    process_roles = spec.process.role_names()
    for schema_role in spec.schema.roles:
        if schema_role in names and schema_role not in process_roles:
            out.append(Violation(
                "schema role outside process",
                f"schema role {schema_role!r} is not referenced by any activity"))
    for req in spec.schema.requirements:
        aspect = _subset_aspect(spec, req.between)
        if ("social", aspect) not in ALLOWED_CELLS:
            out.append(Violation(
                "aspect/phase mismatch",
                f"social requirement {req.id!r} attached to aspect {aspect!r}"))

    # process structure
    try:
        spec.process.topological_order()
    except graphlib.CycleError:
        out.append(Violation("cycle", "precedence graph contains a cycle"))
    declared = set(names)
    known_activities = set(spec.process.activity_ids())
    for activity in spec.process.activities:
        if not activity.roles:
            out.append(Violation(
                "activity without role", f"activity {activity.id!r} references no role"))
        for role_name in activity.roles:
            if role_name not in declared:
                out.append(Violation(
                    "unknown role",
                    f"activity {activity.id!r} references unknown role {role_name!r}"))
    for src, dst in spec.process.precedence:
        for node in (src, dst):
            if node not in known_activities:
                out.append(Violation(
                    "scope unresolvable",
                    f"precedence edge references unknown activity {node!r}"))

    # performance requirements
    for preq in spec.performance_requirements:
        if ("performance", preq.aspect) not in ALLOWED_CELLS:
            out.append(Violation(
                "aspect/phase mismatch",
                f"performance requirement {preq.metric!r} on aspect {preq.aspect!r}"))
        if preq.scope != "process" and preq.scope not in spec.process.sub_processes:
            out.append(Violation(
                "scope unresolvable",
                f"performance scope {preq.scope!r} names no sub-process"))
        if preq.weight <= 0:
            out.append(Violation(
                "invalid weight", f"performance requirement {preq.metric!r} has "
                f"non-positive weight"))
        if preq.metric == "indicator" and not preq.indicator:
            out.append(Violation(
                "unknown indicator",
                "indicator metric without an indicator reference"))

    # thresholds
    th = spec.thresholds
    if not (0.0 <= th.phase2_cutoff <= 1.0):
        out.append(Violation("threshold out of range", "phase2_cutoff not in [0,1]"))
    if not (0.0 <= th.phase3_fitness <= 1.0):
        out.append(Violation("threshold out of range", "phase3_fitness not in [0,1]"))
    if th.phase2_max_candidates < 1:
        out.append(Violation("threshold out of range",
                             "phase2_max_candidates must be positive"))

    # fitness components
    for comp in spec.fitness:
        if comp.kind not in ("social_schema", "indicator", "role_conformance"):
            out.append(Violation("unknown fitness component", comp.kind))
        if comp.weight <= 0:
            out.append(Violation("invalid weight",
                                 f"fitness component {comp.kind!r} weight"))
        if comp.kind == "indicator" and comp.max_value == comp.min_value:
            out.append(Violation("degenerate interval",
                                 f"indicator component {comp.indicator!r} "
                                 f"normalization range is empty"))
    return out


FitnessFn = Callable[[Mapping[str, Element]], float]


def fitness_of(spec: VOSpecification, registry: Registry, graph: SocialGraph,
               indicators: Optional[IndicatorStore] = None) -> FitnessFn:
    """Scalar phase-3 fitness: normalized weighted sum of the declared
    components (social-schema degree by default)."""
    for comp in spec.fitness:
        if comp.kind == "indicator":
            if indicators is None or comp.indicator not in indicators.indicators:
                raise IndicatorError(
                    f"fitness references undefined indicator {comp.indicator!r}")
    total_weight = sum(c.weight for c in spec.fitness)

    def evaluate(assignment: Mapping[str, Element]) -> float:
        acc = 0.0
        for comp in spec.fitness:
            if comp.kind == "social_schema":
                value = graph.evaluate_schema(spec.schema, assignment).degree
            elif comp.kind == "role_conformance":
                degrees = []
                for role in spec.roles:
                    element = assignment.get(role.name)
                    if element is not None:
                        degrees.append(registry.evaluate_conformance(element, role))
                value = sum(degrees) / len(degrees) if degrees else 1.0
            else:  # indicator
                raw = indicators.evaluate_indicator(comp.indicator)
                if raw is None:
                    value = 0.0
                else:
                    span = comp.max_value - comp.min_value
                    value = max(0.0, min(1.0, (raw - comp.min_value) / span))
            acc += comp.weight * value
        return acc / total_weight if total_weight else 1.0

    return evaluate


def compute_performance_vector(spec: VOSpecification,
                               assignment: Mapping[str, Element],
                               registry: Registry,
                               indicators: Optional[IndicatorStore] = None
                               ) -> List[Optional[float]]:
    """One component per performance requirement; None marks a component that
    could not be computed (missing service attribute)."""

    def duration_of(activity: Activity) -> Optional[float]:
        # activity duration = response time of the service assigned to its
        # service role; several service roles take the slowest. Activities
        # performed only by partners contribute zero; a service missing the
        # attribute makes the component unavailable.
        best = 0.0
        for role_name in activity.roles:
            element = assignment.get(role_name)
            if element is None or element.kind != SERVICE:
                continue
            values = [val.value
                      for val in registry.resolve(element.id,
                                                  "non_functional.response_time")
                      if val.kind == "number"]
            if not values:
                return None
            best = max(best, max(values))
        return best

    def cost_of(activity: Activity) -> Optional[float]:
        total = 0.0
        for role_name in activity.roles:
            element = assignment.get(role_name)
            if element is None or element.kind != SERVICE:
                continue
            values = [val.value
                      for val in registry.resolve(element.id, "cost")
                      if val.kind == "number"]
            if not values:
                return None
            total += values[0]
        return total

    vector: List[Optional[float]] = []
    for preq in spec.performance_requirements:
        if preq.metric == "indicator":
            value = None
            if indicators is not None and preq.indicator in indicators.indicators:
                value = indicators.evaluate_indicator(preq.indicator)
            vector.append(value)
            continue
        if preq.metric == "total_cost":
            scope = (spec.process.activity_ids() if preq.scope == "process"
                     else spec.process.sub_processes.get(preq.scope, []))
            costs = [cost_of(a) for a in spec.process.activities if a.id in scope]
            if any(c is None for c in costs):
                vector.append(None)
            else:
                vector.append(float(sum(costs)))
            continue
        # duration metrics: longest path over the (restricted) DAG
        scope = (spec.process.activity_ids() if preq.scope == "process"
                 else spec.process.sub_processes.get(preq.scope, []))
        durations: Dict[str, float] = {}
        missing = False
        for activity in spec.process.activities:
            if activity.id not in scope:
                continue
            d = duration_of(activity)
            if d is None:
                missing = True
                break
            durations[activity.id] = d
        if missing:
            vector.append(None)
        else:
            vector.append(spec.process.longest_path(durations, subset=list(durations)))
    return vector
