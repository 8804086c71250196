"""Shared oracles and the deliberately malformed spec corpus."""

import copy
import random

from voselect.demo import demo_spec_doc


def brute_force_longest_path(node_ids, edges, durations):
    """Independent oracle: enumerate every path explicitly and keep the
    maximum node-weighted sum."""
    adjacency = {n: [] for n in node_ids}
    for src, dst in edges:
        if src in adjacency and dst in adjacency:
            adjacency[src].append(dst)

    best = 0.0

    def walk(node, acc):
        nonlocal best
        acc += durations[node]
        best = max(best, acc)
        for nxt in adjacency[node]:
            walk(nxt, acc)

    for node in node_ids:
        walk(node, 0.0)
    return best


def random_dag(rng: random.Random, max_nodes=10):
    n = rng.randint(1, max_nodes)
    nodes = [f"a{i}" for i in range(n)]
    edges = [(nodes[i], nodes[j])
             for i in range(n) for j in range(i + 1, n)
             if rng.random() < 0.3]
    durations = {node: rng.uniform(0.0, 10.0) for node in nodes}
    return nodes, edges, durations


def malformed_spec_docs():
    """Ten spec documents, each attaching a requirement to an empty cell of
    the aspect/phase applicability matrix."""
    corpus = []

    social_doc = {"id": "bad-sr", "type": "social",
                  "between": ["lead_contractor", "logistics"],
                  "relation_type": "past_cooperation",
                  "direction": "directed", "weight": 1.0}
    perf_doc = {"type": "performance", "metric": "process_duration",
                "scope": "process", "optimal": 0, "reject": 100, "weight": 1.0}
    role_doc = {"type": "role", "path": "cost",
                "optimal": {"type": "number", "value": 0, "unit": "EUR"},
                "reject": {"type": "number", "value": 100, "unit": "EUR"},
                "weight": 1.0, "mandatory": True}

    def base():
        return copy.deepcopy(demo_spec_doc("malformed"))

    # partner aspect (roles[0]) may carry only role requirements
    for doc in (social_doc, perf_doc):
        spec = base()
        spec["roles"][0]["requirements"].append(copy.deepcopy(doc))
        corpus.append((spec, "aspect/phase mismatch"))
    # service aspect (roles[1]) likewise
    for doc in (social_doc, perf_doc):
        spec = base()
        spec["roles"][1]["requirements"].append(copy.deepcopy(doc))
        corpus.append((spec, "aspect/phase mismatch"))
    # role-subset aspect (the schema) may carry only social requirements
    for doc in (role_doc, perf_doc):
        spec = base()
        spec["schema"]["requirements"].append(copy.deepcopy(doc))
        corpus.append((spec, "aspect/phase mismatch"))
    # process aspect may carry only performance requirements
    for doc in (role_doc, social_doc):
        spec = base()
        spec["performance_requirements"].append(copy.deepcopy(doc))
        corpus.append((spec, "aspect/phase mismatch"))
    # the second service role and the subprocess scope, for full coverage
    spec = base()
    spec["roles"][2]["requirements"].append(copy.deepcopy(social_doc))
    corpus.append((spec, "aspect/phase mismatch"))
    spec = base()
    spec["performance_requirements"].append(copy.deepcopy(role_doc))
    corpus.append((spec, "aspect/phase mismatch"))
    assert len(corpus) == 10
    return corpus
