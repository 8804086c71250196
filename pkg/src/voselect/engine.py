"""Phases 2-4: per-role candidate selection, genetic-algorithm variant
generation with threshold filtering, exhaustive enumeration oracle, and
vector-valued performance ranking."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from .indicators import IndicatorStore
from .registry import PARTNER, Element, Registry
from .social import SocialGraph
from .vo_spec import (
    VOSpecification,
    compute_performance_vector,
    fitness_of,
)

Genome = Tuple[str, ...]


class EngineError(ValueError):
    pass


class UnsatisfiableRoleError(EngineError):
    def __init__(self, role_name: str):
        super().__init__(f"no candidate satisfies role {role_name!r}")
        self.role_name = role_name


class SearchSpaceBoundError(EngineError):
    pass


@dataclass
class CandidateSet:
    """Candidates for one role, sorted by descending conformance, ties by id."""

    role_name: str
    candidates: List[Tuple[str, float]] = field(default_factory=list)

    def ids(self) -> List[str]:
        return [eid for eid, _ in self.candidates]

    def conformance_of(self, element_id: str) -> float:
        for eid, level in self.candidates:
            if eid == element_id:
                return level
        raise KeyError(element_id)

    def to_json(self) -> dict:
        return {"role": self.role_name,
                "candidates": [{"element": eid, "conformance": level}
                               for eid, level in self.candidates]}


@dataclass
class VOVariant:
    genome: Genome
    fitness: float
    performance: Optional[List[Optional[float]]] = None
    rank: Optional[int] = None
    stale: bool = False
    social_breakdown: Dict[str, float] = field(default_factory=dict)

    def assignment_json(self, role_names: Sequence[str]) -> dict:
        return {name: eid for name, eid in zip(role_names, self.genome)}

    def to_json(self, role_names: Sequence[str]) -> dict:
        return {
            "assignment": self.assignment_json(role_names),
            "genome": list(self.genome),
            "fitness": self.fitness,
            "performance": self.performance,
            "rank": self.rank,
            "stale": self.stale,
            "social_breakdown": dict(sorted(self.social_breakdown.items())),
        }


@dataclass
class GAConfig:
    population_size: int = 50
    generations: int = 200
    tournament_size: int = 3
    elite_count: int = 2
    crossover_probability: float = 0.9
    mutation_probability: float = 0.2
    seed: int = 0
    top_k: int = 100

    def __post_init__(self):
        if self.population_size < 1 or self.generations < 0:
            raise EngineError("population and generations must be positive")
        if not self.elite_count < self.population_size:
            raise EngineError("elite_count must be below population_size")
        if not 1 <= self.tournament_size <= self.population_size:
            raise EngineError("tournament_size must not exceed population_size")
        for p in (self.crossover_probability, self.mutation_probability):
            if not 0.0 <= p <= 1.0:
                raise EngineError("operator probabilities must lie in [0,1]")

    def to_json(self) -> dict:
        return {
            "population_size": self.population_size,
            "generations": self.generations,
            "tournament_size": self.tournament_size,
            "elite_count": self.elite_count,
            "crossover_probability": self.crossover_probability,
            "mutation_probability": self.mutation_probability,
            "seed": self.seed,
            "top_k": self.top_k,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "GAConfig":
        known = {f: doc[f] for f in cls.__dataclass_fields__ if f in doc}
        return cls(**known)


@dataclass
class EvalContext:
    """Immutable snapshot the whole selection run reads from."""

    registry: Registry
    graph: SocialGraph
    indicators: Optional[IndicatorStore] = None


# -- phase 2 ---------------------------------------------------------------

def select_candidates(spec: VOSpecification,
                      registry: Registry) -> Dict[str, CandidateSet]:
    """Per role: elements of the role's target kind with conformance at or
    above the phase-2 cutoff, sorted and truncated."""
    cutoff = spec.thresholds.phase2_cutoff
    limit = spec.thresholds.phase2_max_candidates
    out: Dict[str, CandidateSet] = {}
    for role in spec.roles:
        scored = []
        for eid in sorted(registry.elements):
            element = registry.elements[eid]
            if element.kind != role.target_kind:
                continue
            level = registry.evaluate_conformance(element, role)
            if level >= cutoff:
                scored.append((eid, level))
        scored.sort(key=lambda item: (-item[1], item[0]))
        if not scored:
            raise UnsatisfiableRoleError(role.name)
        out[role.name] = CandidateSet(role.name, scored[:limit])
    return out


# -- genetic operators -----------------------------------------------------

def crossover(parent_a: Genome, parent_b: Genome,
              cut_a: int, cut_b: int) -> Tuple[Genome, Genome]:
    """Standard two-point crossover; with a single gene the children are
    copies of the parents."""
    n = len(parent_a)
    if len(parent_b) != n:
        raise EngineError("parents must have equal length")
    if n <= 1:
        return parent_a, parent_b
    if not (0 <= cut_a < cut_b <= n):
        raise EngineError(f"bad cut points ({cut_a}, {cut_b}) for length {n}")
    child1 = parent_a[:cut_a] + parent_b[cut_a:cut_b] + parent_a[cut_b:]
    child2 = parent_b[:cut_a] + parent_a[cut_a:cut_b] + parent_b[cut_b:]
    return child1, child2


def _partner_positions(spec: VOSpecification) -> List[int]:
    return [i for i, role in enumerate(spec.roles) if role.target_kind == PARTNER]


def exclusivity_ok(genome: Genome, partner_positions: Sequence[int]) -> bool:
    seen = [genome[i] for i in partner_positions]
    return len(seen) == len(set(seen))


def repair_exclusivity(genome: Genome, fallback: Genome,
                       pools: Sequence[Sequence[str]],
                       partner_positions: Sequence[int]) -> Genome:
    """Re-draw duplicated partner genes, lowest position first, taking the
    first unused candidate in candidate-set order; fall back to a parent copy
    when no conflict-free draw exists."""
    genes = list(genome)
    used = set()
    for pos in partner_positions:
        if genes[pos] not in used:
            used.add(genes[pos])
            continue
        replacement = next((c for c in pools[pos] if c not in used), None)
        if replacement is None:
            return fallback
        genes[pos] = replacement
        used.add(replacement)
    return tuple(genes)


def mutate(genome: Genome, pools: Sequence[Sequence[str]], rng: random.Random,
           partner_positions: Sequence[int] = (),
           exclusivity: bool = False) -> Genome:
    """Replace the gene at one uniformly chosen position with a uniform draw
    from that role's pool, excluding the current element. A singleton pool
    leaves the genome unchanged."""
    pos = rng.randrange(len(genome))
    forbidden = {genome[pos]}
    if exclusivity and pos in partner_positions:
        forbidden.update(genome[i] for i in partner_positions if i != pos)
    options = [c for c in pools[pos] if c not in forbidden]
    if not options:
        return genome
    genes = list(genome)
    genes[pos] = options[rng.randrange(len(options))]
    return tuple(genes)


def _random_genome(pools: Sequence[Sequence[str]], rng: random.Random,
                   partner_positions: Sequence[int],
                   exclusivity: bool) -> Genome:
    for _ in range(64):
        genes = []
        used = set()
        feasible = True
        for pos, pool in enumerate(pools):
            options = pool
            if exclusivity and pos in partner_positions:
                options = [c for c in pool if c not in used]
                if not options:
                    feasible = False
                    break
            choice = options[rng.randrange(len(options))]
            genes.append(choice)
            if exclusivity and pos in partner_positions:
                used.add(choice)
        if feasible:
            return tuple(genes)
    raise EngineError("could not sample a feasible genome under exclusivity")


# -- phase 3 ---------------------------------------------------------------

def _assignment(spec: VOSpecification, registry: Registry,
                genome: Genome) -> Dict[str, Element]:
    return {role.name: registry.elements[eid]
            for role, eid in zip(spec.roles, genome)}


def _build_variants(spec: VOSpecification, ctx: EvalContext,
                    archive: Mapping[Genome, float], threshold: float,
                    top_k: Optional[int]) -> List[VOVariant]:
    kept = [(g, f) for g, f in archive.items() if f >= threshold]
    kept.sort(key=lambda item: (-item[1], item[0]))
    if top_k is not None:
        kept = kept[:top_k]
    variants = []
    for genome, fit in kept:
        assignment = _assignment(spec, ctx.registry, genome)
        breakdown = ctx.graph.evaluate_schema(spec.schema, assignment).breakdown
        variants.append(VOVariant(genome=genome, fitness=fit,
                                  social_breakdown=breakdown))
    return variants


def run_ga(spec: VOSpecification, candidate_sets: Mapping[str, CandidateSet],
           config: GAConfig, ctx: EvalContext) -> List[VOVariant]:
    """Seeded elitist GA over role assignments. Every evaluated genome is
    archived; the result is the deduplicated archive filtered by the phase-3
    threshold, sorted by fitness (ties by genome), capped at top_k."""
    pools = []
    for role in spec.roles:
        cs = candidate_sets.get(role.name)
        if cs is None or not cs.candidates:
            raise EngineError(f"empty candidate set for role {role.name!r}")
        pools.append(cs.ids())
    partner_positions = _partner_positions(spec)
    fitness_fn = fitness_of(spec, ctx.registry, ctx.graph, ctx.indicators)
    rng = random.Random(config.seed)

    cache: Dict[Genome, float] = {}

    def fitness(genome: Genome) -> float:
        if genome not in cache:
            cache[genome] = fitness_fn(_assignment(spec, ctx.registry, genome))
        return cache[genome]

    population = [_random_genome(pools, rng, partner_positions, spec.exclusivity)
                  for _ in range(config.population_size)]
    for genome in population:
        fitness(genome)

    n = len(pools)
    for _ in range(config.generations):
        population.sort(key=lambda g: (-fitness(g), g))
        next_pop = population[:config.elite_count]

        def tournament() -> Genome:
            picks = [population[rng.randrange(len(population))]
                     for _ in range(config.tournament_size)]
            return min(picks, key=lambda g: (-fitness(g), g))

        while len(next_pop) < config.population_size:
            pa, pb = tournament(), tournament()
            if n > 1 and rng.random() < config.crossover_probability:
                cut_a, cut_b = sorted(rng.sample(range(n + 1), 2))
                ca, cb = crossover(pa, pb, cut_a, cut_b)
                if spec.exclusivity:
                    ca = repair_exclusivity(ca, pa, pools, partner_positions)
                    cb = repair_exclusivity(cb, pb, pools, partner_positions)
            else:
                ca, cb = pa, pb
            for child in (ca, cb):
                if rng.random() < config.mutation_probability:
                    child = mutate(child, pools, rng, partner_positions,
                                   spec.exclusivity)
                fitness(child)
                next_pop.append(child)
        population = next_pop[:config.population_size]

    return _build_variants(spec, ctx, cache, spec.thresholds.phase3_fitness,
                           config.top_k)


def enumerate_all(spec: VOSpecification,
                  candidate_sets: Mapping[str, CandidateSet],
                  ctx: EvalContext,
                  bound: int = 10 ** 6,
                  top_k: Optional[int] = None) -> List[VOVariant]:
    """Exhaustive oracle: evaluates every feasible genome; same threshold and
    ordering contract as run_ga, uncapped by default."""
    pools = []
    size = 1
    for role in spec.roles:
        cs = candidate_sets.get(role.name)
        if cs is None or not cs.candidates:
            raise EngineError(f"empty candidate set for role {role.name!r}")
        pools.append(cs.ids())
        size *= len(cs.candidates)
    if size > bound:
        raise SearchSpaceBoundError(
            f"{size} genomes exceed the enumeration bound {bound}; use run_ga")
    partner_positions = _partner_positions(spec)
    fitness_fn = fitness_of(spec, ctx.registry, ctx.graph, ctx.indicators)

    archive: Dict[Genome, float] = {}
    for combo in itertools.product(*pools):
        genome = tuple(combo)
        if spec.exclusivity and not exclusivity_ok(genome, partner_positions):
            continue
        archive[genome] = fitness_fn(_assignment(spec, ctx.registry, genome))
    return _build_variants(spec, ctx, archive, spec.thresholds.phase3_fitness,
                           top_k)


# -- phase 4 ---------------------------------------------------------------

def evaluate_performance(variant: VOVariant, spec: VOSpecification,
                         ctx: EvalContext) -> VOVariant:
    """Fills in the variant's performance vector; unavailable components stay
    None and flag the variant."""
    assignment = _assignment(spec, ctx.registry, variant.genome)
    variant.performance = compute_performance_vector(
        spec, assignment, ctx.registry, ctx.indicators)
    return variant


def _goodness_scores(variants: Sequence[VOVariant],
                     directions: Sequence[str],
                     weights: Sequence[float]) -> Dict[Genome, float]:
    """Weighted sum of per-component min-max normalized goodness; degenerate
    components contribute zero."""
    arity = len(directions)
    scores: Dict[Genome, float] = {}
    spans = []
    for i in range(arity):
        column = [v.performance[i] for v in variants]
        spans.append((min(column), max(column)))
    for v in variants:
        acc = 0.0
        for i, (lo, hi) in enumerate(spans):
            if hi == lo:
                continue
            value = v.performance[i]
            norm = (value - lo) / (hi - lo)
            goodness = 1.0 - norm if directions[i] == "minimize" else norm
            acc += weights[i] * goodness
        scores[v.genome] = acc
    return scores


def _dominates(a: Sequence[float], b: Sequence[float],
               directions: Sequence[str]) -> bool:
    no_worse = True
    strictly_better = False
    for x, y, d in zip(a, b, directions):
        better = x < y if d == "minimize" else x > y
        worse = x > y if d == "minimize" else x < y
        if worse:
            no_worse = False
        if better:
            strictly_better = True
    return no_worse and strictly_better


def pareto_fronts(variants: Sequence[VOVariant],
                  directions: Sequence[str]) -> List[List[VOVariant]]:
    remaining = list(variants)
    fronts: List[List[VOVariant]] = []
    while remaining:
        front = [v for v in remaining
                 if not any(_dominates(o.performance, v.performance, directions)
                            for o in remaining if o is not v)]
        fronts.append(front)
        front_set = {id(v) for v in front}
        remaining = [v for v in remaining if id(v) not in front_set]
    return fronts


def rank(variants: Sequence[VOVariant], spec: VOSpecification) -> List[VOVariant]:
    """Orders variants by the chosen ranking function and assigns 1-based
    ranks; variants with unavailable components go last."""
    preqs = spec.performance_requirements
    arity = len(preqs)
    for v in variants:
        if v.performance is None or len(v.performance) != arity:
            raise EngineError("performance vector arity mismatch")
    available = [v for v in variants if all(c is not None for c in v.performance)]
    unavailable = sorted((v for v in variants
                          if any(c is None for c in v.performance)),
                         key=lambda v: v.genome)
    directions = [p.direction for p in preqs]
    weights = spec.ranking.weights or [p.weight for p in preqs]
    if len(weights) != arity:
        raise EngineError("ranking weights arity mismatch")

    method = spec.ranking.method
    if not available:
        ordered: List[VOVariant] = []
    elif method == "weighted_sum":
        scores = _goodness_scores(available, directions, weights)
        ordered = sorted(available, key=lambda v: (-scores[v.genome], v.genome))
    elif method == "lexicographic":
        priority = spec.ranking.priority or list(range(arity))

        def lex_key(v: VOVariant):
            parts = []
            for i in priority:
                value = v.performance[i]
                parts.append(value if directions[i] == "minimize" else -value)
            return (tuple(parts), v.genome)

        ordered = sorted(available, key=lex_key)
    elif method == "pareto":
        scores = _goodness_scores(available, directions, weights)
        ordered = []
        for front in pareto_fronts(available, directions):
            ordered.extend(sorted(front, key=lambda v: (-scores[v.genome], v.genome)))
    else:
        raise EngineError(f"unknown ranking method {method!r}")

    result = ordered + unavailable
    for position, v in enumerate(result, start=1):
        v.rank = position
    return result
