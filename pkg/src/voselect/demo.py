"""The documented 3-roles x 3-candidates demo fixture: a small construction
scenario used by the CLI quickstart and the end-to-end tests."""

from __future__ import annotations

from .registry import CompetenceRecord, Element, ServiceDescription
from .social import Relation
from .store import Store
from .values import num, text


def build_demo_store() -> Store:
    store = Store()

    partners = [
        ("P1", "BrickWorks", "masonry", 12),
        ("P2", "PipeCraft", "plumbing", 8),
        ("P3", "DrawBoard", "design", 5),
    ]
    for pid, name, competence, workers in partners:
        store.register_element(
            Element(id=pid, kind="partner", name=name),
            [CompetenceRecord(owner_id=pid, competence_name=competence,
                              capabilities={"workers": num(workers, "people")},
                              cost=num(1000, "EUR"))])

    services = [
        ("S1", "P1", 20, 300),
        ("S2", "P2", 45, 150),
        ("S3", "P3", 80, 90),
    ]
    for sid, provider, response_time, cost in services:
        store.register_element(
            Element(id=sid, kind="service", name=f"service {sid}",
                    provider_id=provider),
            [ServiceDescription(
                service_id=sid,
                functional={"category": text("construction")},
                non_functional={"response_time": num(response_time, "h"),
                                "cost": num(cost, "EUR")})])

    relations = [
        ("r1", "past_cooperation", "P1", "S2", {"year": num(2009)}),
        ("r2", "past_cooperation", "P1", "S3", {"year": num(2007)}),
        ("r3", "recommendation", "S2", "S3", {}),
        ("r4", "past_cooperation", "P2", "S1", {}),
    ]
    for rid, rtype, src, dst, attrs in relations:
        store.add_relation(Relation(id=rid, relation_type=rtype,
                                    source_id=src, target_id=dst,
                                    attributes=attrs))
    return store


def demo_spec_doc(spec_id: str = "demo3x3") -> dict:
    av = lambda v, unit=None: (
        {"type": "number", "value": v, "unit": unit} if unit
        else {"type": "number", "value": v})
    return {
        "id": spec_id,
        "roles": [
            {"name": "lead_contractor", "target_kind": "partner",
             "requirements": [
                 {"type": "role", "path": "capabilities.workers",
                  "optimal": av(10, "people"), "reject": av(0, "people"),
                  "weight": 1.0, "mandatory": True}]},
            {"name": "logistics", "target_kind": "service",
             "requirements": [
                 {"type": "role", "path": "non_functional.response_time",
                  "optimal": av(10, "h"), "reject": av(100, "h"),
                  "weight": 1.0, "mandatory": True}]},
            {"name": "engineering", "target_kind": "service",
             "requirements": [
                 {"type": "role", "path": "non_functional.cost",
                  "optimal": av(50, "EUR"), "reject": av(500, "EUR"),
                  "weight": 1.0, "mandatory": True}]},
        ],
        "process": {
            "activities": [
                {"id": "groundwork", "roles": ["lead_contractor"]},
                {"id": "delivery", "roles": ["logistics"]},
                {"id": "design_review", "roles": ["engineering"]},
            ],
            "precedence": [["groundwork", "delivery"],
                           ["groundwork", "design_review"]],
            "sub_processes": {"supply_chain": ["delivery"]},
        },
        "schema": {
            "roles": ["lead_contractor", "logistics", "engineering"],
            "requirements": [
                {"id": "sr1", "type": "social",
                 "between": ["lead_contractor", "logistics"],
                 "relation_type": "past_cooperation",
                 "direction": "directed", "weight": 1.0},
                {"id": "sr2", "type": "social",
                 "between": ["logistics", "engineering"],
                 "relation_type": "recommendation",
                 "direction": "either", "weight": 1.0},
            ],
        },
        "performance_requirements": [
            {"type": "performance", "metric": "process_duration",
             "scope": "process", "optimal": 0, "reject": 500, "weight": 1.0},
            {"type": "performance", "metric": "total_cost",
             "scope": "process", "optimal": 0, "reject": 5000, "weight": 1.0},
        ],
        "ranking": {"method": "weighted_sum"},
        "thresholds": {"phase2_cutoff": 0.0, "phase3_fitness": 0.5,
                       "phase2_max_candidates": 10},
        "exclusivity": False,
    }
