"""Run state machine for the five selection phases, with planner loop-back
and VO inception into the registry."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional

from .engine import (
    CandidateSet,
    EvalContext,
    GAConfig,
    VOVariant,
    enumerate_all,
    evaluate_performance,
    rank,
    run_ga,
    select_candidates,
)
from .registry import PARTNER, SERVICE, CompetenceRecord, Element, Registry
from .social import Relation, SocialGraph
from .values import AttributeValue
from .vo_spec import VOSpecification, validate_spec

SPECIFIED = "specified"
CANDIDATES_SELECTED = "candidates_selected"
VARIANTS_GENERATED = "variants_generated"
PERFORMANCE_RANKED = "performance_ranked"
INCEPTED = "incepted"
HALTED = "halted"

PHASE_ORDER = [SPECIFIED, CANDIDATES_SELECTED, VARIANTS_GENERATED,
               PERFORMANCE_RANKED, INCEPTED]


class PipelineError(ValueError):
    pass


class WrongStateError(PipelineError):
    pass


class StaleVariantError(PipelineError):
    pass


@dataclass
class Run:
    run_id: str
    spec: VOSpecification
    ctx: EvalContext
    config: GAConfig
    snapshot_id: str = ""
    oracle: bool = False
    state: str = SPECIFIED
    candidate_sets: Dict[str, CandidateSet] = field(default_factory=dict)
    variants: List[VOVariant] = field(default_factory=list)
    events: List[dict] = field(default_factory=list)
    diagnostic: Optional[str] = None
    incepted_id: Optional[str] = None

    def log(self, action: str, detail: str = "") -> None:
        self.events.append({"seq": len(self.events), "action": action,
                            "detail": detail, "state": self.state})

    def role_names(self) -> List[str]:
        return [r.name for r in self.spec.roles]

    def mark_stale(self, reason: str) -> None:
        """Monitoring hook: environment changed under a finished selection."""
        if self.state in (VARIANTS_GENERATED, PERFORMANCE_RANKED):
            for variant in self.variants:
                variant.stale = True
            self.log("alarm", reason)

    def to_json(self) -> dict:
        return {
            "run_id": self.run_id,
            "spec_id": self.spec.id,
            "spec_version": self.spec.version,
            "spec_doc": self.spec.to_json(),
            "config": self.config.to_json(),
            "snapshot": self.snapshot_id,
            "seed": self.config.seed,
            "oracle": self.oracle,
            "state": self.state,
            "diagnostic": self.diagnostic,
            "incepted_id": self.incepted_id,
            "candidate_sets": [cs.to_json() for cs in self.candidate_sets.values()],
            "variants": [v.to_json(self.role_names()) for v in self.variants],
            "events": list(self.events),
        }

    def variants_json(self) -> dict:
        return {
            "run_id": self.run_id,
            "spec_version": self.spec.version,
            "seed": self.config.seed,
            "candidate_sets": [cs.to_json() for cs in self.candidate_sets.values()],
            "variants": [v.to_json(self.role_names()) for v in self.variants],
        }


def advance(run: Run) -> Run:
    """Executes the next phase; a phase failure halts the run with a
    diagnostic so the planner can loop back."""
    try:
        if run.state == SPECIFIED:
            problems = validate_spec(run.spec)
            if problems:
                raise PipelineError(
                    "spec invalid: " + "; ".join(v.message for v in problems))
            run.candidate_sets = select_candidates(run.spec, run.ctx.registry)
            run.state = CANDIDATES_SELECTED
            run.log("advance", "candidates selected")
        elif run.state == CANDIDATES_SELECTED:
            if run.oracle:
                run.variants = enumerate_all(run.spec, run.candidate_sets, run.ctx,
                                             top_k=run.config.top_k)
            else:
                run.variants = run_ga(run.spec, run.candidate_sets, run.config,
                                      run.ctx)
            run.state = VARIANTS_GENERATED
            run.log("advance", f"{len(run.variants)} variants generated")
        elif run.state == VARIANTS_GENERATED:
            for variant in run.variants:
                evaluate_performance(variant, run.spec, run.ctx)
            run.variants = rank(run.variants, run.spec)
            run.state = PERFORMANCE_RANKED
            run.log("advance", "performance ranked")
        elif run.state == PERFORMANCE_RANKED:
            raise WrongStateError("use incept_vo to complete the run")
        else:
            raise WrongStateError(f"cannot advance from state {run.state!r}")
    except WrongStateError:
        raise
    except Exception as exc:
        run.diagnostic = str(exc)
        run.state = HALTED
        run.log("halt", str(exc))
    return run


def loop_back(run: Run, target_state: str,
              amendment: Optional[dict] = None) -> Run:
    """Returns the run to an earlier phase, optionally with an amended spec;
    downstream artifacts are invalidated. An invalid amendment is rejected
    with the run untouched."""
    if target_state not in PHASE_ORDER[:-1]:
        raise PipelineError(f"cannot loop back to {target_state!r}")
    current_idx = (len(PHASE_ORDER) if run.state == HALTED
                   else PHASE_ORDER.index(run.state))
    if PHASE_ORDER.index(target_state) >= current_idx:
        raise WrongStateError(
            f"loop-back target {target_state!r} is not earlier than {run.state!r}")
    if amendment is not None:
        amended = VOSpecification.from_json(amendment)
        problems = validate_spec(amended)
        if problems:
            raise PipelineError(
                "amendment invalid: " + "; ".join(v.message for v in problems))
        amended.version = run.spec.version + 1
        run.spec = amended
    target_idx = PHASE_ORDER.index(target_state)
    if target_idx < PHASE_ORDER.index(CANDIDATES_SELECTED) + 1:
        run.variants = []
    if target_idx < 1:
        run.candidate_sets = {}
    if target_idx < 2:
        run.variants = []
    run.diagnostic = None
    run.state = target_state
    run.log("loop_back", f"to {target_state}")
    return run


def incept_vo(run: Run, registry: Registry, graph: SocialGraph,
              chosen_genome: Optional[List[str]] = None,
              override_stale: bool = False) -> str:
    """Registers the chosen variant as a new organization: competences are
    the union of the member partners' competences, services are the assigned
    services; membership relations link the VO to every member."""
    if run.state != PERFORMANCE_RANKED:
        raise WrongStateError(f"cannot incept from state {run.state!r}")
    if not run.variants:
        raise PipelineError("no ranked variants to incept")
    if chosen_genome is None:
        chosen = run.variants[0]
    else:
        wanted = tuple(chosen_genome)
        chosen = next((v for v in run.variants if v.genome == wanted), None)
        if chosen is None:
            raise PipelineError("chosen variant is not among the ranked variants")
    if chosen.stale and not override_stale:
        raise StaleVariantError(
            "variant is stale after monitoring alarms; pass override to incept")

    members = [registry.elements[eid] for eid in dict.fromkeys(chosen.genome)]
    partner_members = [m for m in members if m.kind == PARTNER]
    service_members = [m for m in members if m.kind == SERVICE]
    if not service_members:
        raise PipelineError("a VO requires a non-empty set of assigned services")

    competences = []
    seen = set()
    for member in partner_members:
        for record in run.ctx.registry.competences.get(member.id, []):
            if record.competence_name in seen:
                continue
            seen.add(record.competence_name)
            competences.append(CompetenceRecord(
                owner_id=f"vo-{run.run_id}",
                competence_name=record.competence_name,
                capabilities=dict(record.capabilities),
                cost=record.cost,
                conspicuity=list(record.conspicuity)))
    if not competences:
        raise PipelineError("a VO requires a non-empty set of competences")

    vo_id = f"vo-{run.run_id}"
    if vo_id in registry.elements:
        raise PipelineError(f"run {run.run_id!r} has already been incepted")
    # flip state before mutating so this run ignores its own monitor events
    run.state = INCEPTED
    vo = Element(
        id=vo_id, kind=PARTNER, name=f"VO {run.run_id}",
        attributes={"services": AttributeValue(
            "list", [AttributeValue("text", s.id) for s in service_members])})
    registry.register_element(vo, competences)
    for member in members:
        graph.add_relation(Relation(
            id=f"{vo_id}-member-{member.id}",
            relation_type="vo_membership",
            source_id=vo_id, target_id=member.id))
    run.incepted_id = vo_id
    run.log("incept", vo_id)
    return vo_id
