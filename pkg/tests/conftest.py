import random

import pytest

from voselect.engine import EvalContext
from voselect.indicators import IndicatorStore
from voselect.registry import CompetenceRecord, Element, Registry, ServiceDescription
from voselect.social import (
    Relation,
    SocialGraph,
    SocialNetworkSchema,
    SocialRequirement,
)
from voselect.values import num, text
from voselect.vo_spec import (
    Activity,
    ProcessStructure,
    Role,
    RoleRequirement,
    Thresholds,
    VOSpecification,
)

RELATION_TYPES = ["past_cooperation", "recognition", "recommendation",
                  "use_of_service"]


def make_registry():
    reg = Registry()
    reg.register_element(
        Element(id="P1", kind="partner", name="BrickWorks"),
        [CompetenceRecord(owner_id="P1", competence_name="masonry",
                          capabilities={"workers": num(12, "people")},
                          cost=num(1000, "EUR"))])
    reg.register_element(
        Element(id="P2", kind="partner", name="PipeCraft"),
        [CompetenceRecord(owner_id="P2", competence_name="plumbing",
                          capabilities={"workers": num(6, "people")},
                          cost=num(700, "EUR"))])
    reg.register_element(
        Element(id="S1", kind="service", name="hauling", provider_id="P1"),
        [ServiceDescription(service_id="S1",
                            functional={"category": text("transport")},
                            non_functional={"response_time": num(30, "h"),
                                            "cost": num(200, "EUR")})])
    return reg


@pytest.fixture
def registry():
    return make_registry()


@pytest.fixture
def graph(registry):
    return SocialGraph(registry)


def random_instance(rng: random.Random, max_roles=4, max_candidates=4,
                    max_social=6, exclusivity=False):
    """A small selection instance with exact per-role candidate pools, a
    random relation graph, and a random social schema."""
    n_roles = rng.randint(2, max_roles)
    registry = Registry()
    roles = []
    pools = {}
    for r in range(n_roles):
        role_name = f"role{r}"
        kind = rng.choice(["partner", "service"])
        pool_size = rng.randint(2, max_candidates)
        ids = []
        for c in range(pool_size):
            eid = f"{role_name}-e{c}"
            if kind == "service":
                provider = f"{eid}-prov"
                registry.register_element(Element(id=provider, kind="partner"))
                registry.register_element(Element(
                    id=eid, kind="service", provider_id=provider,
                    attributes={"pool": text(role_name)}))
            else:
                registry.register_element(Element(
                    id=eid, kind="partner",
                    attributes={"pool": text(role_name)}))
            ids.append(eid)
        pools[role_name] = ids
        roles.append(Role(
            name=role_name, target_kind=kind,
            requirements=[RoleRequirement(path="attributes.pool",
                                          optimal=text(role_name))]))

    graph = SocialGraph(registry)
    member_ids = [eid for ids in pools.values() for eid in ids]
    n_relations = rng.randint(0, 3 * n_roles)
    for i in range(n_relations):
        src, dst = rng.sample(member_ids, 2)
        graph.add_relation(Relation(
            id=f"rel{i}", relation_type=rng.choice(RELATION_TYPES),
            source_id=src, target_id=dst,
            attributes={"volume": num(rng.randint(0, 12))}))

    requirements = []
    for i in range(rng.randint(1, max_social)):
        a, b = rng.sample([r.name for r in roles], 2)
        cond = None
        if rng.random() < 0.4:
            cond = ("volume", 10.0, 0.0)
        requirements.append(SocialRequirement(
            id=f"sr{i}", between=(a, b),
            relation_type=rng.choice(RELATION_TYPES),
            direction=rng.choice(["directed", "either"]),
            attribute_condition=cond,
            weight=rng.choice([0.5, 1.0, 2.0])))
    schema = SocialNetworkSchema(roles=[r.name for r in roles],
                                 requirements=requirements)

    process = ProcessStructure(
        activities=[Activity(id=f"a{r.name}", roles=[r.name]) for r in roles],
        precedence=[(f"a{roles[i].name}", f"a{roles[i + 1].name}")
                    for i in range(len(roles) - 1)])

    spec = VOSpecification(
        id="rand", roles=roles, process=process, schema=schema,
        thresholds=Thresholds(phase2_cutoff=0.5, phase3_fitness=0.0,
                              phase2_max_candidates=max_candidates),
        exclusivity=exclusivity)
    ctx = EvalContext(registry=registry, graph=graph,
                      indicators=IndicatorStore(registry, graph))
    return spec, ctx
