"""Document persistence for all stores, content-addressed snapshots, and the
event wiring between mutations, indicators, and running selections."""

from __future__ import annotations

import hashlib
import json
import threading
import time
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .engine import EvalContext, GAConfig
from .indicators import (
    AlarmNotification,
    Indicator,
    IndicatorStore,
    MonitorEvent,
)
from .pipeline import Run, advance, incept_vo, loop_back
from .registry import (
    CompetenceRecord,
    Element,
    Registry,
    ServiceDescription,
)
from .social import Relation, SocialGraph
from .vo_spec import VOSpecification


def canonical_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def content_id(doc) -> str:
    return hashlib.sha256(canonical_json(doc).encode()).hexdigest()[:16]


class StoreError(ValueError):
    pass


class Store:
    """Live stores plus snapshot and run management. Writers are serialized;
    selection runs read immutable snapshots taken at run start."""

    def __init__(self):
        self._lock = threading.RLock()
        self.registry = Registry()
        self.graph = SocialGraph(self.registry)
        self.indicators = IndicatorStore(self.registry, self.graph)
        self.specs: Dict[str, VOSpecification] = {}
        self.runs: Dict[str, Run] = {}
        self.snapshots: Dict[str, dict] = {}
        self._run_counter = 0
        self.registry.add_listener(self._on_event)
        self.graph.add_listener(self._on_event)

    # -- monitoring wiring --------------------------------------------------

    def _on_event(self, event_type: str, subject_id: str) -> None:
        event = MonitorEvent(event_type=event_type, subject_id=subject_id,
                             timestamp=time.time())
        produced = self.indicators.notify(event)
        if produced:
            reason = ", ".join(sorted({n.indicator_id for n in produced}))
            for run in self.runs.values():
                run.mark_stale(f"alarm on {reason}")

    # -- mutations ----------------------------------------------------------

    def register_element(self, element: Element, descriptions=()) -> str:
        with self._lock:
            return self.registry.register_element(element, descriptions)

    def add_relation(self, relation: Relation) -> str:
        with self._lock:
            return self.graph.add_relation(relation)

    def define_indicator(self, indicator: Indicator) -> str:
        with self._lock:
            return self.indicators.define_indicator(indicator)

    def put_spec(self, spec: VOSpecification) -> str:
        with self._lock:
            self.specs[spec.id] = spec
            return spec.id

    # -- snapshots -----------------------------------------------------------

    def snapshot(self) -> str:
        """Content-addressed capture of registry, graph and indicator
        definitions; identical content yields the identical id."""
        with self._lock:
            doc = {"registry": self.registry.to_json(),
                   "graph": self.graph.to_json(),
                   "indicators": self.indicators.to_json()}
            sid = content_id(doc)
            self.snapshots.setdefault(sid, doc)
            return sid

    def snapshot_context(self, snapshot_id: str) -> EvalContext:
        doc = self.snapshots.get(snapshot_id)
        if doc is None:
            raise StoreError(f"unknown snapshot {snapshot_id!r}")
        registry = Registry.from_json(doc["registry"])
        graph = SocialGraph.from_json(doc["graph"], registry)
        indicators = IndicatorStore(registry, graph)
        indicators.load_json(doc["indicators"])
        return EvalContext(registry=registry, graph=graph, indicators=indicators)

    # -- runs ----------------------------------------------------------------

    def start_run(self, spec_id: str, config: Optional[GAConfig] = None,
                  oracle: bool = False, run_id: Optional[str] = None) -> Run:
        with self._lock:
            spec = self.specs.get(spec_id)
            if spec is None:
                raise StoreError(f"unknown spec {spec_id!r}")
            sid = self.snapshot()
            if run_id is None:
                self._run_counter += 1
                run_id = f"run-{self._run_counter:04d}"
            if run_id in self.runs:
                raise StoreError(f"run {run_id!r} already exists")
            run = Run(run_id=run_id, spec=spec, ctx=self.snapshot_context(sid),
                      config=config or GAConfig(), snapshot_id=sid, oracle=oracle)
            run.log("start", f"spec {spec_id} snapshot {sid}")
            self.runs[run_id] = run
            return run

    def get_run(self, run_id: str) -> Run:
        run = self.runs.get(run_id)
        if run is None:
            raise StoreError(f"unknown run {run_id!r}")
        return run

    def advance_run(self, run_id: str) -> Run:
        return advance(self.get_run(run_id))

    def loopback_run(self, run_id: str, target_state: str,
                     amendment: Optional[dict] = None) -> Run:
        return loop_back(self.get_run(run_id), target_state, amendment)

    def incept_run(self, run_id: str, chosen_genome: Optional[List[str]] = None,
                   override_stale: bool = False) -> str:
        with self._lock:
            return incept_vo(self.get_run(run_id), self.registry, self.graph,
                             chosen_genome, override_stale)

    def notifications(self, cursor: int = 0) -> Tuple[List[dict], int]:
        notes, new_cursor = self.indicators.feed_since(cursor)
        return [n.to_json() for n in notes], new_cursor

    # -- file persistence ----------------------------------------------------

    def save(self, data_dir: str) -> None:
        root = Path(data_dir)
        root.mkdir(parents=True, exist_ok=True)
        with self._lock:
            (root / "elements.json").write_text(
                json.dumps(self.registry.to_json(), indent=2, sort_keys=True))
            (root / "relations.json").write_text(
                json.dumps(self.graph.to_json(), indent=2, sort_keys=True))
            (root / "indicators.json").write_text(
                json.dumps(self.indicators.to_json(), indent=2, sort_keys=True))
            specs = {sid: spec.to_json() for sid, spec in self.specs.items()}
            (root / "specs.json").write_text(
                json.dumps(specs, indent=2, sort_keys=True))
            runs = {rid: run.to_json() for rid, run in self.runs.items()}
            (root / "runs.json").write_text(
                json.dumps(runs, indent=2, sort_keys=True))
            (root / "snapshots.json").write_text(
                json.dumps(self.snapshots, indent=2, sort_keys=True))
            feed = {"notifications": [n.to_json()
                                      for n in self.indicators.feed],
                    "alarm_state": self.indicators.alarm_state}
            (root / "feed.json").write_text(
                json.dumps(feed, indent=2, sort_keys=True))

    @classmethod
    def load(cls, data_dir: str) -> "Store":
        root = Path(data_dir)
        store = cls()

        def read(name: str) -> dict:
            path = root / name
            return json.loads(path.read_text()) if path.exists() else {}

        elements_doc = read("elements.json")
        if elements_doc:
            loaded = Registry.from_json(elements_doc)
            # re-register through the store so listeners stay wired
            store.registry.elements = loaded.elements
            store.registry.competences = loaded.competences
            store.registry.services = loaded.services
        relations_doc = read("relations.json")
        for rel in relations_doc.get("relations", []):
            store.graph.relations[rel["id"]] = Relation.from_json(rel)
        store.indicators.load_json(read("indicators.json"))
        for sid, doc in read("specs.json").items():
            store.specs[sid] = VOSpecification.from_json(doc)
        feed_doc = read("feed.json")
        store.indicators.feed = [AlarmNotification.from_json(n)
                                 for n in feed_doc.get("notifications", [])]
        store.indicators.alarm_state.update(feed_doc.get("alarm_state", {}))
        store.snapshots.update(read("snapshots.json"))
        for rid, doc in read("runs.json").items():
            store.runs[rid] = store._run_from_json(doc)
        store._run_counter = len(store.runs)
        return store

    def _run_from_json(self, doc: dict) -> Run:
        from .engine import CandidateSet, VOVariant

        spec = VOSpecification.from_json(doc["spec_doc"])
        spec.version = doc.get("spec_version", spec.version)
        run = Run(
            run_id=doc["run_id"],
            spec=spec,
            ctx=self.snapshot_context(doc["snapshot"]),
            config=GAConfig.from_json(doc.get("config", {})),
            snapshot_id=doc["snapshot"],
            oracle=doc.get("oracle", False),
            state=doc.get("state", "specified"),
            diagnostic=doc.get("diagnostic"),
            incepted_id=doc.get("incepted_id"),
            events=list(doc.get("events", [])),
        )
        for cs in doc.get("candidate_sets", []):
            run.candidate_sets[cs["role"]] = CandidateSet(
                role_name=cs["role"],
                candidates=[(c["element"], c["conformance"])
                            for c in cs["candidates"]])
        for v in doc.get("variants", []):
            run.variants.append(VOVariant(
                genome=tuple(v["genome"]),
                fitness=v["fitness"],
                performance=v.get("performance"),
                rank=v.get("rank"),
                stale=v.get("stale", False),
                social_breakdown=dict(v.get("social_breakdown", {}))))
        return run

    def import_registry(self, doc: dict) -> int:
        """Imports the {elements, competences, services} document; returns the
        number of elements added."""
        loaded = Registry.from_json(doc)
        added = set()
        with self._lock:
            for eid in sorted(loaded.elements,
                              key=lambda e: loaded.elements[e].kind != "partner"):
                if eid in self.registry.elements:
                    continue
                self.registry.register_element(loaded.elements[eid])
                added.add(eid)
            for eid in sorted(added):
                for record in loaded.competences.get(eid, []):
                    self.registry.add_description(record, _emit=False)
                for desc in loaded.services.get(eid, []):
                    self.registry.add_description(desc, _emit=False)
        return len(added)

    def import_relations(self, doc: dict) -> int:
        count = 0
        with self._lock:
            for rel in doc.get("relations", []):
                if rel["id"] in self.graph.relations:
                    continue
                self.add_relation(Relation.from_json(rel))
                count += 1
        return count
