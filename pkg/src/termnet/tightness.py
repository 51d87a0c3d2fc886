"""Search for worst-case false-entry persistence instances.

A corrupted entry about an unsatisfied agent can survive at an honest
agent for at most ``diameter + agent_count - 2`` iterations.  This module
looks for instances that meet the bound exactly: a graph of the requested
size and diameter, a faulty agent, and a subject entry such that a
sustained frozen-stamp injection makes some honest agent hold the false
entry for exactly the bound.

The search tries a structured family first — a hub adjacent to the subject
and to a prefix of a chain, so the injected entry reaches the chain fast
while the clearing wave started by the subject's zero has to crawl back
through the whole chain — and falls back to seeded random graphs.  Every
candidate's persistence is measured by actually simulating it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .criteria import Schedule
from .errors import GraphError
from .faults import FaultScript
from .graph import CommGraph
from .sim import Scenario, run


@dataclass(frozen=True)
class TightInstance:
    """A witness meeting the persistence bound exactly."""

    graph: CommGraph
    script: FaultScript
    subject: int
    persistence: int
    bound: int

    def to_dict(self) -> dict:
        return {
            "graph": self.graph.to_dict(),
            "script": self.script.to_dict(),
            "subject": self.subject,
            "persistence": self.persistence,
            "bound": self.bound,
        }


def persistence_bound(agent_count: int, diameter: int) -> int:
    return diameter + agent_count - 2


def hub_chain_graph(agent_count: int, diameter: int) -> CommGraph | None:
    """Structured candidate: subject 0, chain 1..n-2, hub n-1.

    The hub joins the subject and the first ``n - 1 - diameter`` chain
    agents; the subject also closes the far end of the chain.  For many
    (n, diameter) pairs this graph has exactly the requested diameter and
    the hub is the worst-case faulty agent.
    """
    n = agent_count
    if n < 4 or diameter < 2 or n - 1 - diameter < 1:
        return None
    hub = n - 1
    edges = [(0, hub), (0, n - 2)]
    edges.extend((i, i + 1) for i in range(1, n - 2))
    edges.extend((hub, m) for m in range(1, n - diameter))
    try:
        graph = CommGraph(n, edges)
    except GraphError:
        return None
    if graph.diameter() != diameter:
        return None
    return graph


def measure_injection_persistence(graph: CommGraph, faulty: int, subject: int,
                                  *, execution: str = "vectorized") -> int:
    """Worst honest persistence of one sustained frozen injection.

    The subject never satisfies its criterion, the faulty agent floods its
    neighbors with a frozen-stamp assertion of the subject's entry for long
    enough to cover any clearing cascade, and the run is measured to the
    point where everything injected has been cleared again.
    """
    n = graph.agent_count
    diameter = graph.diameter()
    start = diameter + 2
    length = 2 * (diameter + n) + 6
    script = FaultScript(agent=faulty,
                         windows=((start, start + length),),
                         subjects=(subject,))
    scenario = Scenario(
        graph=graph,
        criterion=Schedule.never(n),
        method="fault_tolerant",
        faults=(script,),
        max_iterations=start + length + diameter + n + 4,
        execution=execution,
        name=f"persistence-probe-f{faulty}-k{subject}",
    )
    report = run(scenario)
    return report.max_single_persistence


def find_tight_instance(agent_count: int, diameter: int, *,
                        budget: int = 400, seed: int = 0,
                        execution: str = "vectorized"
                        ) -> TightInstance | None:
    """Find an instance whose worst persistence equals the bound.

    ``budget`` caps the number of simulated candidate placements.  Returns
    None when the budget runs out (or no instance can exist, e.g. fewer
    than three agents give nothing to relay through).
    """
    bound = persistence_bound(agent_count, diameter)
    if agent_count < 3 or diameter < 1 or bound < 1:
        return None
    rng = np.random.default_rng(seed)
    spent = 0

    def probe(graph, faulty, subject):
        nonlocal spent
        spent += 1
        persistence = measure_injection_persistence(
            graph, faulty, subject, execution=execution)
        if persistence == bound:
            start = graph.diameter() + 2
            length = 2 * (graph.diameter() + graph.agent_count) + 6
            script = FaultScript(agent=faulty,
                                 windows=((start, start + length),),
                                 subjects=(subject,))
            return TightInstance(graph, script, subject, persistence, bound)
        return None

    structured = hub_chain_graph(agent_count, diameter)
    if structured is not None and spent < budget:
        found = probe(structured, agent_count - 1, 0)
        if found:
            return found

    attempts = 0
    max_attempts = 60 * budget  # graph rejections (wrong diameter) are cheap
    while spent < budget and attempts < max_attempts:
        attempts += 1
        edge_prob = float(rng.uniform(0.05, 0.5))
        graph = CommGraph.unchecked(
            agent_count, _random_edges(agent_count, edge_prob, rng))
        if not graph.is_connected():
            continue
        if graph.diameter() != diameter:
            continue
        pairs = [(f, k) for f in range(agent_count)
                 for k in range(agent_count) if f != k]
        rng.shuffle(pairs)
        for f, k in pairs[: min(8, len(pairs))]:
            if spent >= budget:
                break
            found = probe(graph, f, k)
            if found:
                return found
    return None


def _random_edges(n: int, edge_prob: float, rng) -> list:
    upper = [(a, b) for a in range(n) for b in range(a + 1, n)]
    mask = rng.random(len(upper)) < edge_prob
    return [e for e, m in zip(upper, mask) if m]
