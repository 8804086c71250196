"""Indicator expressions over registry/graph state, plus observer-based
monitoring with edge-triggered alarm levels."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from .registry import MalformedQueryError, Predicate, Registry
from .social import SocialGraph
from .values import NUMBER


class IndicatorError(ValueError):
    pass


class IndicatorDefinitionError(IndicatorError):
    """Malformed expression; carries the tree position of the fault."""

    def __init__(self, message: str, position: str):
        super().__init__(f"{message} (at {position})")
        self.position = position


UNAVAILABLE = None  # evaluation result when a value is undefined

_AGGREGATES = {"count", "sum", "min", "max", "avg"}
_ARITH = {"+", "-", "*", "/"}
_COMPARISONS = {"<", "<=", ">", ">=", "=="}
_ALARM_OPS = {"<", "<=", ">", ">="}


@dataclass
class DataQuery:
    """Selects elements or relations, optionally projecting one attribute."""

    source: str  # "elements" | "relations"
    predicates: List[Predicate] = field(default_factory=list)
    relation_type: Optional[str] = None
    endpoint: Optional[str] = None
    project: Optional[str] = None

    def to_json(self) -> dict:
        doc: Dict[str, Any] = {"source": self.source}
        if self.predicates:
            doc["predicates"] = [p.to_json() for p in self.predicates]
        if self.relation_type is not None:
            doc["relation_type"] = self.relation_type
        if self.endpoint is not None:
            doc["endpoint"] = self.endpoint
        if self.project is not None:
            doc["project"] = self.project
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "DataQuery":
        return cls(
            source=doc["source"],
            predicates=[Predicate.from_json(p) for p in doc.get("predicates", [])],
            relation_type=doc.get("relation_type"),
            endpoint=doc.get("endpoint"),
            project=doc.get("project"),
        )


def check_expression(expr: Any, position: str = "/") -> None:
    """Validate an expression tree document; raises with the fault position."""
    if not isinstance(expr, dict):
        raise IndicatorDefinitionError("expression node must be an object", position)
    if "lit" in expr:
        if not isinstance(expr["lit"], (int, float)) or isinstance(expr["lit"], bool):
            raise IndicatorDefinitionError("literal must be numeric", position)
        return
    if "op" in expr:
        if expr["op"] not in _ARITH:
            raise IndicatorDefinitionError(
                f"unknown arithmetic operator {expr['op']!r}", position)
        args = expr.get("args")
        if not isinstance(args, list) or len(args) != 2:
            raise IndicatorDefinitionError("arithmetic takes exactly two args", position)
        for i, arg in enumerate(args):
            check_expression(arg, f"{position}args/{i}/")
        return
    if "cmp" in expr:
        if expr["cmp"] not in _COMPARISONS:
            raise IndicatorDefinitionError(
                f"unknown comparison {expr['cmp']!r}", position)
        for side in ("left", "right"):
            if side not in expr:
                raise IndicatorDefinitionError(f"comparison missing {side!r}", position)
            check_expression(expr[side], f"{position}{side}/")
        return
    if "agg" in expr:
        if expr["agg"] not in _AGGREGATES:
            raise IndicatorDefinitionError(
                f"unknown aggregate {expr['agg']!r}", position)
        query = expr.get("query")
        if not isinstance(query, dict) or query.get("source") not in ("elements", "relations"):
            raise IndicatorDefinitionError("aggregate needs a query over elements "
                                           "or relations", position)
        try:
            DataQuery.from_json(query)
        except (MalformedQueryError, KeyError) as exc:
            raise IndicatorDefinitionError(f"bad query: {exc}", f"{position}query/")
        if expr["agg"] != "count" and not query.get("project"):
            raise IndicatorDefinitionError(
                f"aggregate {expr['agg']!r} requires a projected attribute", position)
        return
    raise IndicatorDefinitionError(
        "node must be one of lit / op / cmp / agg", position)


def _query_sources(expr: Any, acc: set) -> set:
    if isinstance(expr, dict):
        if "agg" in expr:
            acc.add(expr["query"]["source"])
        for key in ("args",):
            for sub in expr.get(key, []):
                _query_sources(sub, acc)
        for key in ("left", "right"):
            if key in expr:
                _query_sources(expr[key], acc)
    return acc


@dataclass
class Indicator:
    id: str
    name: str
    expression: dict
    alarm: Optional[Tuple[str, float]] = None  # (comparison op, threshold)
    subscribers: List[str] = field(default_factory=list)

    def __post_init__(self):
        check_expression(self.expression)
        if self.alarm is not None and self.alarm[0] not in _ALARM_OPS:
            raise IndicatorError(f"unknown alarm comparison {self.alarm[0]!r}")

    def sources(self) -> set:
        return _query_sources(self.expression, set())

    def to_json(self) -> dict:
        doc: Dict[str, Any] = {"id": self.id, "name": self.name,
                               "expression": self.expression,
                               "subscribers": list(self.subscribers)}
        if self.alarm:
            doc["alarm"] = {"op": self.alarm[0], "threshold": self.alarm[1]}
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "Indicator":
        alarm = None
        if doc.get("alarm"):
            alarm = (doc["alarm"]["op"], doc["alarm"]["threshold"])
        return cls(id=doc["id"], name=doc.get("name", doc["id"]),
                   expression=doc["expression"], alarm=alarm,
                   subscribers=list(doc.get("subscribers", [])))


@dataclass
class MonitorEvent:
    event_type: str  # element_registered | element_updated | relation_added | indicator_recomputed
    subject_id: str
    timestamp: float = 0.0


@dataclass
class AlarmNotification:
    seq: int
    indicator_id: str
    subscriber: str
    value: float
    op: str
    threshold: float
    event_type: str
    subject_id: str

    def to_json(self) -> dict:
        return {"seq": self.seq, "indicator": self.indicator_id,
                "subscriber": self.subscriber, "value": self.value,
                "op": self.op, "threshold": self.threshold,
                "event_type": self.event_type, "subject": self.subject_id}

    @classmethod
    def from_json(cls, doc: dict) -> "AlarmNotification":
        return cls(seq=doc["seq"], indicator_id=doc["indicator"],
                   subscriber=doc["subscriber"], value=doc["value"],
                   op=doc["op"], threshold=doc["threshold"],
                   event_type=doc["event_type"], subject_id=doc["subject"])


class Evaluator:
    """Evaluates expression trees against a registry + graph snapshot."""

    def __init__(self, registry: Registry, graph: SocialGraph):
        self.registry = registry
        self.graph = graph

    def evaluate(self, expr: dict) -> Optional[float]:
        if "lit" in expr:
            return float(expr["lit"])
        if "op" in expr:
            a = self.evaluate(expr["args"][0])
            b = self.evaluate(expr["args"][1])
            if a is UNAVAILABLE or b is UNAVAILABLE:
                return UNAVAILABLE
            if expr["op"] == "/":
                if b == 0:
                    return UNAVAILABLE
                return a / b
            return {"+": a + b, "-": a - b, "*": a * b}[expr["op"]]
        if "cmp" in expr:
            left = self.evaluate(expr["left"])
            right = self.evaluate(expr["right"])
            if left is UNAVAILABLE or right is UNAVAILABLE:
                return UNAVAILABLE
            ok = {"<": left < right, "<=": left <= right, ">": left > right,
                  ">=": left >= right, "==": left == right}[expr["cmp"]]
            return 1.0 if ok else 0.0
        if "agg" in expr:
            return self._aggregate(expr["agg"], DataQuery.from_json(expr["query"]))
        raise IndicatorError(f"unevaluable node {expr!r}")

    def _aggregate(self, agg: str, query: DataQuery) -> Optional[float]:
        values = self._collect(query)
        if agg == "count":
            return float(len(values))
        numbers = [v for v in values if isinstance(v, (int, float))]
        if agg == "sum":
            return float(sum(numbers))
        if not numbers:
            return UNAVAILABLE
        if agg == "min":
            return float(min(numbers))
        if agg == "max":
            return float(max(numbers))
        return float(sum(numbers) / len(numbers))  # avg

    def _collect(self, query: DataQuery) -> List[Any]:
        if query.source == "elements":
            elements = self.registry.search(query.predicates)
            if query.project is None:
                return [e.id for e in elements]
            out = []
            for e in elements:
                for val in self.registry.resolve(e.id, query.project):
                    if val.kind == NUMBER:
                        out.append(val.value)
            return out
        relations = [self.graph.relations[k] for k in sorted(self.graph.relations)]
        if query.relation_type is not None:
            relations = [r for r in relations if r.relation_type == query.relation_type]
        if query.endpoint is not None:
            relations = [r for r in relations
                         if query.endpoint in (r.source_id, r.target_id)]
        if query.predicates:
            relations = [r for r in relations
                         if all(self._rel_matches(r, p) for p in query.predicates)]
        if query.project is None:
            return [r.id for r in relations]
        out = []
        for r in relations:
            val = r.attributes.get(query.project)
            if val is not None and val.kind == NUMBER:
                out.append(val.value)
        return out

    @staticmethod
    def _rel_matches(relation, pred: Predicate) -> bool:
        val = relation.attributes.get(pred.path)
        return val is not None and pred.matches(val)


def _alarm_fires(value: Optional[float], alarm: Optional[Tuple[str, float]]) -> bool:
    if alarm is None or value is UNAVAILABLE:
        return False
    op, threshold = alarm
    return {"<": value < threshold, "<=": value <= threshold,
            ">": value > threshold, ">=": value >= threshold}[op]


class IndicatorStore:
    """Stores indicators, recomputes them on events, and keeps the
    append-only alarm notification feed."""

    def __init__(self, registry: Registry, graph: SocialGraph):
        self.registry = registry
        self.graph = graph
        self.indicators: Dict[str, Indicator] = {}
        self.values: Dict[str, Optional[float]] = {}
        self.alarm_state: Dict[str, bool] = {}
        self.feed: List[AlarmNotification] = []

    def define_indicator(self, indicator: Indicator) -> str:
        if indicator.id in self.indicators:
            raise IndicatorError(f"indicator {indicator.id!r} already defined")
        self.indicators[indicator.id] = indicator
        value = Evaluator(self.registry, self.graph).evaluate(indicator.expression)
        self.values[indicator.id] = value
        self.alarm_state[indicator.id] = _alarm_fires(value, indicator.alarm)
        return indicator.id

    def evaluate_indicator(self, indicator_id: str) -> Optional[float]:
        if indicator_id not in self.indicators:
            raise IndicatorError(f"unknown indicator {indicator_id!r}")
        return Evaluator(self.registry, self.graph).evaluate(
            self.indicators[indicator_id].expression)

    def notify(self, event: MonitorEvent) -> List[AlarmNotification]:
        """Recompute in-scope indicators; edge-triggered alarms append one
        notification per subscriber to the feed."""
        scope = {"element_registered": "elements", "element_updated": "elements",
                 "relation_added": "relations"}.get(event.event_type)
        produced: List[AlarmNotification] = []
        for ind_id in sorted(self.indicators):
            indicator = self.indicators[ind_id]
            if scope is not None and scope not in indicator.sources():
                continue
            value = self.evaluate_indicator(ind_id)
            self.values[ind_id] = value
            fires = _alarm_fires(value, indicator.alarm)
            was_firing = self.alarm_state[ind_id]
            self.alarm_state[ind_id] = fires
            if fires and not was_firing:
                for subscriber in indicator.subscribers:
                    note = AlarmNotification(
                        seq=len(self.feed), indicator_id=ind_id,
                        subscriber=subscriber, value=value,
                        op=indicator.alarm[0], threshold=indicator.alarm[1],
                        event_type=event.event_type, subject_id=event.subject_id)
                    self.feed.append(note)
                    produced.append(note)
        return produced

    def feed_since(self, cursor: int) -> Tuple[List[AlarmNotification], int]:
        notes = self.feed[cursor:]
        return notes, len(self.feed)

    def to_json(self) -> dict:
        return {"indicators": [self.indicators[k].to_json()
                               for k in sorted(self.indicators)]}

    def load_json(self, doc: dict) -> None:
        for ind in doc.get("indicators", []):
            self.define_indicator(Indicator.from_json(ind))

    def copy(self, registry: Registry, graph: SocialGraph) -> "IndicatorStore":
        dup = IndicatorStore(registry, graph)
        dup.indicators = copy.deepcopy(self.indicators)
        dup.values = dict(self.values)
        dup.alarm_state = dict(self.alarm_state)
        return dup
