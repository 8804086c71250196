"""Partner and service selection engine for virtual organizations."""

from .engine import (
    CandidateSet,
    EvalContext,
    GAConfig,
    VOVariant,
    crossover,
    enumerate_all,
    evaluate_performance,
    mutate,
    rank,
    run_ga,
    select_candidates,
)
from .indicators import Indicator, IndicatorStore, MonitorEvent
from .pipeline import Run, advance, incept_vo, loop_back
from .registry import (
    CompetenceRecord,
    Element,
    Predicate,
    Registry,
    ServiceDescription,
)
from .social import Relation, SocialGraph, SocialNetworkSchema, SocialRequirement
from .store import Store
from .values import AttributeValue
from .vo_spec import (
    Role,
    RoleRequirement,
    VOSpecification,
    fitness_of,
    validate_spec,
)

__version__ = "0.1.0"
