"""Command-line front door: batch registry/graph management, spec validation,
selection runs, indicator tooling, reports, and the HTTP server.

Exit codes: 0 success, 1 validation failure, 2 runtime failure.
"""

from __future__ import annotations

import json
import sys
from typing import Optional

import click

from .engine import GAConfig
from .indicators import Indicator
from .pipeline import PERFORMANCE_RANKED, HALTED
from .registry import Predicate
from .report import render_report
from .social import Relation
from .store import Store, content_id
from .vo_spec import VOSpecification, validate_spec

EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


def read_doc(source: str):
    """JSON from a file path, or stdin when the argument is '-'."""
    raw = sys.stdin.read() if source == "-" else open(source).read()
    return json.loads(raw)


def emit(ctx_obj, doc, human: Optional[str] = None):
    if ctx_obj.get("json") or human is None:
        click.echo(json.dumps(doc, sort_keys=True, indent=2))
    else:
        click.echo(human)


class LocalBackend:
    """Operates directly on a data directory."""

    def __init__(self, data_dir: str):
        self.data_dir = data_dir
        self.store = Store.load(data_dir)

    def save(self):
        self.store.save(self.data_dir)

    def registry_doc(self):
        return self.store.registry.to_json()

    def import_registry(self, doc):
        count = self.store.import_registry(doc)
        self.save()
        return count

    def search(self, predicates):
        return [e.to_json() for e in self.store.registry.search(predicates)]

    def import_relations(self, doc):
        count = self.store.import_relations(doc)
        self.save()
        return count

    def add_relation(self, doc):
        rid = self.store.add_relation(Relation.from_json(doc))
        self.save()
        return rid

    def define_indicator(self, doc):
        iid = self.store.define_indicator(Indicator.from_json(doc))
        self.save()
        return iid

    def eval_indicator(self, indicator_id):
        return self.store.indicators.evaluate_indicator(indicator_id)

    def feed(self, cursor):
        notes, new_cursor = self.store.notifications(cursor)
        return {"notifications": notes, "cursor": new_cursor}

    def start_run(self, spec_doc, config, oracle):
        spec = VOSpecification.from_json(spec_doc)
        violations = validate_spec(spec)
        if violations:
            raise click.ClickException(
                "spec invalid: " + "; ".join(v.message for v in violations))
        self.store.put_spec(spec)
        run_id = "run-" + content_id({
            "spec": spec.to_json(), "config": config.to_json(),
            "oracle": oracle, "snapshot": self.store.snapshot()})
        if run_id in self.store.runs:
            del self.store.runs[run_id]
        run = self.store.start_run(spec.id, config, oracle=oracle,
                                   run_id=run_id)
        while run.state not in (PERFORMANCE_RANKED, HALTED):
            self.store.advance_run(run.run_id)
        self.save()
        return run.to_json()

    def advance(self, run_id):
        run = self.store.advance_run(run_id)
        self.save()
        return run.to_json()

    def loopback(self, run_id, target, amendment):
        run = self.store.loopback_run(run_id, target, amendment)
        self.save()
        return run.to_json()

    def variants(self, run_id):
        return self.store.get_run(run_id).variants_json()

    def incept(self, run_id, genome, override):
        vo_id = self.store.incept_run(run_id, genome, override)
        self.save()
        return {"vo_id": vo_id, "state": self.store.get_run(run_id).state}

    def get_run(self, run_id):
        return self.store.get_run(run_id)


class RemoteBackend:
    """Drives a running service; identical subcommand surface."""

    def __init__(self, url: str):
        import httpx

        self.base = url.rstrip("/") + "/v1"
        self.client = httpx.Client()

    def _check(self, response):
        if response.status_code >= 400:
            try:
                body = response.json()
                message = body.get("message", response.text)
            except ValueError:
                message = response.text
            raise click.ClickException(message)
        return response.json()

    def registry_doc(self):
        doc = {"elements": [], "competences": [], "services": []}
        cursor = 0
        while True:
            page = self._check(self.client.get(
                f"{self.base}/elements", params={"cursor": cursor}))
            for element in page["elements"]:
                detail = self._check(self.client.get(
                    f"{self.base}/elements/{element['id']}"))
                doc["elements"].append(detail["element"])
                doc["competences"].extend(detail["competences"])
                doc["services"].extend(detail["services"])
            cursor = page["cursor"]
            if cursor >= page["total"]:
                break
        return doc

    def import_registry(self, doc):
        from .registry import Registry

        loaded = Registry.from_json(doc)
        count = 0
        order = sorted(loaded.elements,
                       key=lambda e: loaded.elements[e].kind != "partner")
        for eid in order:
            body = {"element": loaded.elements[eid].to_json(),
                    "competences": [r.to_json()
                                    for r in loaded.competences.get(eid, [])],
                    "services": [s.to_json()
                                 for s in loaded.services.get(eid, [])]}
            response = self.client.post(f"{self.base}/elements", json=body)
            if response.status_code == 409:
                continue
            self._check(response)
            count += 1
        return count

    def search(self, predicates):
        body = {"predicates": [p.to_json() for p in predicates]}
        return self._check(self.client.post(
            f"{self.base}/elements/search", json=body))["elements"]

    def import_relations(self, doc):
        count = 0
        for rel in doc.get("relations", []):
            response = self.client.post(f"{self.base}/relations", json=rel)
            if response.status_code == 409:
                continue
            self._check(response)
            count += 1
        return count

    def add_relation(self, doc):
        return self._check(self.client.post(
            f"{self.base}/relations", json=doc))["id"]

    def define_indicator(self, doc):
        return self._check(self.client.post(
            f"{self.base}/indicators", json=doc))["id"]

    def eval_indicator(self, indicator_id):
        return self._check(self.client.get(
            f"{self.base}/indicators/{indicator_id}"))["value"]

    def feed(self, cursor):
        return self._check(self.client.get(
            f"{self.base}/notifications", params={"cursor": cursor}))

    def start_run(self, spec_doc, config, oracle):
        self._check(self.client.post(f"{self.base}/specs", json=spec_doc))
        run = self._check(self.client.post(f"{self.base}/runs", json={
            "spec_id": spec_doc["id"], "ga_config": config.to_json(),
            "oracle": oracle}))
        while run["state"] not in (PERFORMANCE_RANKED, HALTED):
            run = self.advance(run["run_id"])
        return run

    def advance(self, run_id):
        return self._check(self.client.post(
            f"{self.base}/runs/{run_id}/advance"))

    def loopback(self, run_id, target, amendment):
        return self._check(self.client.post(
            f"{self.base}/runs/{run_id}/loopback",
            json={"target_state": target, "amendment": amendment}))

    def variants(self, run_id):
        return self._check(self.client.get(
            f"{self.base}/runs/{run_id}/variants"))

    def incept(self, run_id, genome, override):
        body = {"genome": genome, "override_stale": override}
        result = self._check(self.client.post(
            f"{self.base}/runs/{run_id}/incept", json=body))
        return {"vo_id": result["vo_id"], "state": result["run"]["state"]}


def backend_from(ctx_obj):
    if ctx_obj.get("url"):
        return RemoteBackend(ctx_obj["url"])
    return LocalBackend(ctx_obj["data_dir"])


@click.group()
@click.option("--data-dir", default="./data", show_default=True,
              help="Local data directory.")
@click.option("--url", default=None,
              help="Base URL of a running service; overrides --data-dir.")
@click.option("--json", "json_out", is_flag=True,
              help="Machine-readable output.")
@click.pass_context
def main(ctx, data_dir, url, json_out):
    """Partner and service selection for virtual organizations."""
    ctx.obj = {"data_dir": data_dir, "url": url, "json": json_out}


# -- registry ---------------------------------------------------------------

@main.group()
def registry():
    """Import, export and search the element registry."""


@registry.command("import")
@click.argument("source")
@click.pass_context
def registry_import(ctx, source):
    count = backend_from(ctx.obj).import_registry(read_doc(source))
    emit(ctx.obj, {"imported": count}, f"imported {count} elements")


@registry.command("export")
@click.argument("target", default="-")
@click.pass_context
def registry_export(ctx, target):
    doc = backend_from(ctx.obj).registry_doc()
    payload = json.dumps(doc, sort_keys=True, indent=2)
    if target == "-":
        click.echo(payload)
    else:
        open(target, "w").write(payload)
        emit(ctx.obj, {"written": target}, f"wrote {target}")


@registry.command("search")
@click.argument("predicates")
@click.pass_context
def registry_search(ctx, predicates):
    """PREDICATES is a JSON list of {path, op, value} objects ('-' = stdin)."""
    docs = read_doc(predicates) if predicates == "-" else json.loads(predicates)
    parsed = [Predicate.from_json(p) for p in docs]
    found = backend_from(ctx.obj).search(parsed)
    emit(ctx.obj, {"elements": found},
         "\n".join(e["id"] for e in found) or "(no matches)")


# -- graph ------------------------------------------------------------------

@main.group()
def graph():
    """Import relations and add single edges."""


@graph.command("import")
@click.argument("source")
@click.pass_context
def graph_import(ctx, source):
    count = backend_from(ctx.obj).import_relations(read_doc(source))
    emit(ctx.obj, {"imported": count}, f"imported {count} relations")


@graph.command("add-relation")
@click.argument("relation")
@click.pass_context
def graph_add_relation(ctx, relation):
    """RELATION is a JSON document ('-' = stdin)."""
    doc = read_doc(relation) if relation == "-" else json.loads(relation)
    rid = backend_from(ctx.obj).add_relation(doc)
    emit(ctx.obj, {"id": rid}, f"added relation {rid}")


# -- spec -------------------------------------------------------------------

@main.group()
def spec():
    """Specification tooling."""


@spec.command("validate")
@click.argument("source")
@click.pass_context
def spec_validate(ctx, source):
    violations = validate_spec(VOSpecification.from_json(read_doc(source)))
    doc = {"ok": not violations,
           "violations": [v.to_json() for v in violations]}
    if violations:
        emit(ctx.obj, doc, "\n".join(
            f"{v.category}: {v.message}" for v in violations))
        sys.exit(EXIT_VALIDATION)
    emit(ctx.obj, doc, "ok")


# -- run --------------------------------------------------------------------

@main.group()
def run():
    """Start and steer selection runs."""


@run.command("start")
@click.option("--spec", "spec_source", required=True, help="Spec JSON file.")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--ga-population", default=50, show_default=True, type=int)
@click.option("--ga-generations", default=200, show_default=True, type=int)
@click.option("--threshold", default=None, type=float,
              help="Override the spec's phase-3 fitness threshold.")
@click.option("--oracle", is_flag=True,
              help="Exhaustive enumeration instead of the GA.")
@click.pass_context
def run_start(ctx, spec_source, seed, ga_population, ga_generations,
              threshold, oracle):
    """Run phases 2-4 and print the ranked variants."""
    spec_doc = read_doc(spec_source)
    if threshold is not None:
        spec_doc.setdefault("thresholds", {})["phase3_fitness"] = threshold
    config = GAConfig(population_size=ga_population,
                      generations=ga_generations, seed=seed)
    result = backend_from(ctx.obj).start_run(spec_doc, config, oracle)
    if result["state"] == HALTED:
        emit(ctx.obj, result, f"run {result['run_id']} halted: "
             f"{result['diagnostic']}")
        sys.exit(EXIT_RUNTIME)
    emit(ctx.obj, {"run_id": result["run_id"], "state": result["state"],
                   "seed": result["seed"],
                   "variants": result["variants"]},
         f"run {result['run_id']}: {len(result['variants'])} variants ranked")


@run.command("advance")
@click.argument("run_id")
@click.pass_context
def run_advance(ctx, run_id):
    result = backend_from(ctx.obj).advance(run_id)
    if result["state"] == HALTED:
        emit(ctx.obj, result, f"halted: {result['diagnostic']}")
        sys.exit(EXIT_RUNTIME)
    emit(ctx.obj, result, f"run {run_id} now {result['state']}")


@run.command("loopback")
@click.argument("run_id")
@click.option("--target", required=True,
              help="Earlier state to return to.")
@click.option("--amendment", default=None, help="Amended spec JSON file.")
@click.pass_context
def run_loopback(ctx, run_id, target, amendment):
    doc = read_doc(amendment) if amendment else None
    result = backend_from(ctx.obj).loopback(run_id, target, doc)
    emit(ctx.obj, result, f"run {run_id} back to {result['state']}")


@run.command("variants")
@click.argument("run_id")
@click.pass_context
def run_variants(ctx, run_id):
    result = backend_from(ctx.obj).variants(run_id)
    emit(ctx.obj, result, "\n".join(
        f"#{v['rank'] or '-'} fitness={v['fitness']:.4f} "
        + ",".join(v["genome"]) for v in result["variants"]) or "(none)")


@run.command("incept")
@click.argument("run_id")
@click.option("--genome", default=None,
              help="Comma-separated element ids; defaults to rank 1.")
@click.option("--override-stale", is_flag=True)
@click.pass_context
def run_incept(ctx, run_id, genome, override_stale):
    chosen = genome.split(",") if genome else None
    result = backend_from(ctx.obj).incept(run_id, chosen, override_stale)
    emit(ctx.obj, result, f"incepted {result['vo_id']}")


@run.command("report")
@click.argument("run_id")
@click.option("--out", required=True, help="Output directory.")
@click.pass_context
def run_report(ctx, run_id, out):
    """Render variants.csv and figures for a finished run (local mode)."""
    if ctx.obj.get("url"):
        raise click.ClickException("report rendering requires --data-dir mode")
    backend = LocalBackend(ctx.obj["data_dir"])
    written = render_report(backend.get_run(run_id), out)
    emit(ctx.obj, {"written": written}, "\n".join(written))


# -- indicators -------------------------------------------------------------

@main.group()
def indicators():
    """Define and evaluate indicators; read the alarm feed."""


@indicators.command("define")
@click.argument("source")
@click.pass_context
def indicators_define(ctx, source):
    iid = backend_from(ctx.obj).define_indicator(read_doc(source))
    emit(ctx.obj, {"id": iid}, f"defined indicator {iid}")


@indicators.command("eval")
@click.argument("indicator_id")
@click.pass_context
def indicators_eval(ctx, indicator_id):
    value = backend_from(ctx.obj).eval_indicator(indicator_id)
    emit(ctx.obj, {"id": indicator_id, "value": value},
         "unavailable" if value is None else str(value))


@indicators.command("feed")
@click.option("--cursor", default=0, type=int, show_default=True)
@click.pass_context
def indicators_feed(ctx, cursor):
    result = backend_from(ctx.obj).feed(cursor)
    emit(ctx.obj, result, "\n".join(
        f"[{n['seq']}] {n['indicator']} {n['op']} {n['threshold']} "
        f"(value {n['value']}) -> {n['subscriber']}"
        for n in result["notifications"]) or "(empty)")


# -- serve ------------------------------------------------------------------

@main.command()
@click.option("--port", default=8450, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.pass_context
def serve(ctx, port, host):
    """Start the HTTP service over the data directory."""
    from .api import serve as run_server

    run_server(port=port, data_dir=ctx.obj["data_dir"], host=host)


def entrypoint():
    try:
        main(standalone_mode=False)
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        sys.exit(EXIT_VALIDATION)
    except click.ClickException as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        sys.exit(EXIT_VALIDATION)
    except click.Abort:
        sys.exit(EXIT_RUNTIME)
    except SystemExit:
        raise
    except Exception as exc:  # store/pipeline failures
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)


if __name__ == "__main__":
    entrypoint()
