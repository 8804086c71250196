"""HTTP/JSON service exposing registry, graph, indicators, specs, runs and
the notification feed under /v1."""

from __future__ import annotations

from typing import Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .engine import GAConfig
from .indicators import Indicator, IndicatorError
from .pipeline import PipelineError, StaleVariantError, WrongStateError
from .registry import (
    CompetenceRecord,
    DanglingReferenceError,
    DuplicateIdError,
    Element,
    Predicate,
    RegistryError,
    ServiceDescription,
)
from .social import DanglingEndpointError, Relation, SocialGraphError
from .store import Store, StoreError
from .values import MalformedValueError, UnitMismatchError
from .vo_spec import SpecError, VOSpecification, validate_spec


def error_body(code: str, message: str, detail=None) -> dict:
    return {"code": code, "message": message, "detail": detail}


_STATUS = [
    ((StoreError,), 404, "not_found"),
    ((DuplicateIdError,), 409, "conflict"),
    ((WrongStateError, StaleVariantError), 409, "conflict"),
    ((DanglingReferenceError, DanglingEndpointError), 422, "dangling_reference"),
    ((UnitMismatchError,), 422, "unit_mismatch"),
    ((MalformedValueError, RegistryError, SocialGraphError, IndicatorError,
      SpecError, PipelineError, ValueError, KeyError), 400, "bad_request"),
]


def create_app(store: Store) -> FastAPI:
    app = FastAPI(title="voselect", version="0.1.0")

    @app.exception_handler(Exception)
    async def handle(request: Request, exc: Exception):
        for types, status, code in _STATUS:
            if isinstance(exc, types):
                return JSONResponse(status_code=status,
                                    content=error_body(code, str(exc)))
        return JSONResponse(status_code=500,
                            content=error_body("internal", str(exc)))

    v1 = "/v1"

    # -- registry -----------------------------------------------------------

    @app.get(f"{v1}/elements")
    def list_elements(cursor: int = 0, limit: int = 100):
        ids = sorted(store.registry.elements)
        page = ids[cursor:cursor + limit]
        return {"elements": [store.registry.elements[i].to_json() for i in page],
                "cursor": cursor + len(page), "total": len(ids)}

    @app.get(f"{v1}/elements/{{element_id}}")
    def get_element(element_id: str):
        element = store.registry.elements.get(element_id)
        if element is None:
            return JSONResponse(status_code=404, content=error_body(
                "not_found", f"unknown element {element_id!r}"))
        return {
            "element": element.to_json(),
            "competences": [r.to_json()
                            for r in store.registry.competences.get(element_id, [])],
            "services": [s.to_json()
                         for s in store.registry.services.get(element_id, [])],
        }

    @app.post(f"{v1}/elements", status_code=201)
    def post_element(body: dict):
        element = Element.from_json(body["element"])
        descriptions = []
        for doc in body.get("competences", []):
            descriptions.append(CompetenceRecord.from_json(doc))
        for doc in body.get("services", []):
            descriptions.append(ServiceDescription.from_json(doc))
        return {"id": store.register_element(element, descriptions)}

    @app.post(f"{v1}/elements/search")
    def search_elements(body: dict):
        predicates = [Predicate.from_json(p) for p in body.get("predicates", [])]
        return {"elements": [e.to_json() for e in store.registry.search(predicates)]}

    # -- relations ----------------------------------------------------------

    @app.get(f"{v1}/relations")
    def list_relations(relation_type: Optional[str] = None,
                       cursor: int = 0, limit: int = 100):
        relations = [store.graph.relations[k] for k in sorted(store.graph.relations)]
        if relation_type:
            relations = [r for r in relations if r.relation_type == relation_type]
        page = relations[cursor:cursor + limit]
        return {"relations": [r.to_json() for r in page],
                "cursor": cursor + len(page), "total": len(relations)}

    @app.post(f"{v1}/relations", status_code=201)
    def post_relation(body: dict):
        return {"id": store.add_relation(Relation.from_json(body))}

    # -- indicators ----------------------------------------------------------

    @app.get(f"{v1}/indicators")
    def list_indicators():
        return {"indicators": [
            dict(store.indicators.indicators[k].to_json(),
                 value=store.indicators.values.get(k))
            for k in sorted(store.indicators.indicators)]}

    @app.post(f"{v1}/indicators", status_code=201)
    def post_indicator(body: dict):
        return {"id": store.define_indicator(Indicator.from_json(body))}

    @app.get(f"{v1}/indicators/{{indicator_id}}")
    def get_indicator(indicator_id: str):
        value = store.indicators.evaluate_indicator(indicator_id)
        return dict(store.indicators.indicators[indicator_id].to_json(),
                    value=value)

    # -- specs ---------------------------------------------------------------

    @app.get(f"{v1}/specs")
    def list_specs():
        return {"specs": [store.specs[k].to_json() for k in sorted(store.specs)]}

    @app.get(f"{v1}/specs/{{spec_id}}")
    def get_spec(spec_id: str):
        spec = store.specs.get(spec_id)
        if spec is None:
            return JSONResponse(status_code=404, content=error_body(
                "not_found", f"unknown spec {spec_id!r}"))
        return spec.to_json()

    @app.post(f"{v1}/specs", status_code=201)
    def post_spec(body: dict):
        spec = VOSpecification.from_json(body)
        violations = validate_spec(spec)
        if violations:
            return JSONResponse(status_code=422, content=error_body(
                "invalid_spec", "specification violates its invariants",
                [v.to_json() for v in violations]))
        return {"id": store.put_spec(spec)}

    @app.post(f"{v1}/specs/validate")
    def validate_spec_endpoint(body: dict):
        violations = validate_spec(VOSpecification.from_json(body))
        return {"ok": not violations,
                "violations": [v.to_json() for v in violations]}

    # -- runs ----------------------------------------------------------------

    @app.post(f"{v1}/runs", status_code=201)
    def post_run(body: dict):
        config = GAConfig.from_json(body.get("ga_config", {}))
        run = store.start_run(body["spec_id"], config,
                              oracle=body.get("oracle", False))
        return run.to_json()

    @app.get(f"{v1}/runs")
    def list_runs():
        return {"runs": [{"run_id": rid, "state": store.runs[rid].state}
                         for rid in sorted(store.runs)]}

    @app.get(f"{v1}/runs/{{run_id}}")
    def get_run(run_id: str):
        return store.get_run(run_id).to_json()

    @app.post(f"{v1}/runs/{{run_id}}/advance")
    def advance_run(run_id: str):
        return store.advance_run(run_id).to_json()

    @app.post(f"{v1}/runs/{{run_id}}/loopback")
    def loopback_run(run_id: str, body: dict):
        return store.loopback_run(run_id, body["target_state"],
                                  body.get("amendment")).to_json()

    @app.post(f"{v1}/runs/{{run_id}}/incept")
    def incept_run(run_id: str, body: Optional[dict] = None):
        body = body or {}
        vo_id = store.incept_run(run_id, body.get("genome"),
                                 body.get("override_stale", False))
        return {"vo_id": vo_id, "run": store.get_run(run_id).to_json()}

    @app.get(f"{v1}/runs/{{run_id}}/variants")
    def run_variants(run_id: str):
        return store.get_run(run_id).variants_json()

    # -- notifications -------------------------------------------------------

    @app.get(f"{v1}/notifications")
    def notifications(cursor: int = 0):
        notes, new_cursor = store.notifications(cursor)
        return {"notifications": notes, "cursor": new_cursor}

    return app


def serve(port: int = 8450, data_dir: Optional[str] = None,
          host: str = "127.0.0.1"):
    """Run the HTTP service, loading and saving the data directory."""
    import uvicorn

    store = Store.load(data_dir) if data_dir else Store()
    app = create_app(store)

    if data_dir:
        @app.on_event("shutdown")
        def persist():
            store.save(data_dir)

    uvicorn.run(app, host=host, port=port)
