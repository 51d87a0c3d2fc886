"""Undirected communication graphs for agent networks.

The protocol layers only ever see a ``CommGraph``: a validated, connected,
undirected graph over densely numbered agents 0..n-1.  Distances are hop
counts computed by per-source BFS and cached as a full matrix, since every
run needs the diameter and many checks need individual distances.
"""

from __future__ import annotations

import numpy as np

from .errors import DisconnectedGraphError, GraphError

TOPOLOGY_KINDS = ("ring", "path", "star", "complete", "random", "random_diameter")


def _normalize_edges(agent_count: int, edges) -> list[tuple[int, int]]:
    seen = set()
    out = []
    for edge in edges:
        try:
            a, b = edge
        except (TypeError, ValueError):
            raise GraphError(f"edge {edge!r} is not a pair")
        a, b = int(a), int(b)
        if not (0 <= a < agent_count and 0 <= b < agent_count):
            raise GraphError(
                f"edge ({a}, {b}) out of range for {agent_count} agents"
            )
        if a == b:
            raise GraphError(f"self-loop at agent {a}")
        key = (min(a, b), max(a, b))
        if key in seen:
            raise GraphError(f"duplicate edge {key}")
        seen.add(key)
        out.append(key)
    out.sort()
    return out


class CommGraph:
    """Connected undirected graph over agents 0..agent_count-1.

    The regular constructor rejects disconnected graphs, because every
    protocol assumes connectivity.  ``CommGraph.unchecked`` skips that test
    for callers that need to inspect possibly-disconnected candidates
    (topology search, cut-set analysis, error-path tests).
    """

    def __init__(self, agent_count: int, edges, _skip_connectivity: bool = False):
        agent_count = int(agent_count)
        if agent_count < 1:
            raise GraphError("agent_count must be >= 1")
        self.agent_count = agent_count
        self.edges = _normalize_edges(agent_count, edges)
        self._build_adjacency()
        self._dist: np.ndarray | None = None
        if not _skip_connectivity and not self.is_connected():
            raise DisconnectedGraphError(
                f"graph on {agent_count} agents with {len(self.edges)} edges "
                "is not connected"
            )

    @classmethod
    def unchecked(cls, agent_count: int, edges) -> "CommGraph":
        """Build without the connectivity requirement (still validates edges)."""
        return cls(agent_count, edges, _skip_connectivity=True)

    def _build_adjacency(self) -> None:
        n = self.agent_count
        degree = np.zeros(n, dtype=np.int64)
        for a, b in self.edges:
            degree[a] += 1
            degree[b] += 1
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(degree, out=indptr[1:])
        indices = np.zeros(len(self.edges) * 2, dtype=np.int64)
        fill = indptr[:-1].copy()
        for a, b in self.edges:
            indices[fill[a]] = b
            fill[a] += 1
            indices[fill[b]] = a
            fill[b] += 1
        for i in range(n):
            indices[indptr[i]:indptr[i + 1]].sort()
        self._indptr = indptr
        self._indices = indices

    # -- basic queries -----------------------------------------------------

    def _check_agent(self, i: int) -> int:
        i = int(i)
        if not 0 <= i < self.agent_count:
            raise GraphError(f"agent id {i} out of range [0, {self.agent_count})")
        return i

    def neighbors(self, i: int) -> list[int]:
        """Sorted neighbor ids of agent ``i``."""
        i = self._check_agent(i)
        return self._indices[self._indptr[i]:self._indptr[i + 1]].tolist()

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """Adjacency in CSR form ``(indptr, indices)`` for the array kernels."""
        return self._indptr, self._indices

    def adjacency_matrix(self) -> np.ndarray:
        """Dense boolean adjacency matrix."""
        n = self.agent_count
        adj = np.zeros((n, n), dtype=bool)
        for a, b in self.edges:
            adj[a, b] = True
            adj[b, a] = True
        return adj

    # -- distances ---------------------------------------------------------

    def _bfs(self, source: int) -> np.ndarray:
        dist = np.full(self.agent_count, -1, dtype=np.int64)
        dist[source] = 0
        frontier = [source]
        hops = 0
        while frontier:
            hops += 1
            nxt = []
            for u in frontier:
                for v in self._indices[self._indptr[u]:self._indptr[u + 1]]:
                    if dist[v] < 0:
                        dist[v] = hops
                        nxt.append(int(v))
            frontier = nxt
        return dist

    def distance_matrix(self) -> np.ndarray:
        """All-pairs hop counts (cached).  Unreachable pairs hold -1."""
        if self._dist is None:
            self._dist = np.stack(
                [self._bfs(s) for s in range(self.agent_count)]
            )
        return self._dist

    def distance(self, i: int, j: int) -> int:
        """Hop count between agents ``i`` and ``j``.

        Raises:
            DisconnectedGraphError: if ``j`` is unreachable from ``i``.
        """
        i = self._check_agent(i)
        j = self._check_agent(j)
        d = int(self.distance_matrix()[i, j])
        if d < 0:
            raise DisconnectedGraphError(f"agent {j} unreachable from {i}")
        return d

    def diameter(self) -> int:
        """Largest hop count over all pairs.

        Raises:
            DisconnectedGraphError: if the graph is not connected.
        """
        dm = self.distance_matrix()
        if (dm < 0).any():
            raise DisconnectedGraphError("diameter undefined: graph disconnected")
        return int(dm.max())

    def eccentricity(self, i: int) -> int:
        """Largest hop count from agent ``i`` to any other agent."""
        i = self._check_agent(i)
        row = self.distance_matrix()[i]
        if (row < 0).any():
            raise DisconnectedGraphError("eccentricity undefined: graph disconnected")
        return int(row.max())

    def is_connected(self) -> bool:
        return bool((self._bfs(0) >= 0).all())

    def is_cutset(self, agents) -> bool:
        """True if removing ``agents`` disconnects the remaining graph.

        A remainder of zero or one agents is trivially connected, so sets
        that large are never cut sets.
        """
        removed = {self._check_agent(a) for a in agents}
        remaining = [v for v in range(self.agent_count) if v not in removed]
        if len(remaining) <= 1:
            return False
        alive = set(remaining)
        seen = {remaining[0]}
        stack = [remaining[0]]
        while stack:
            u = stack.pop()
            for v in self._indices[self._indptr[u]:self._indptr[u + 1]]:
                v = int(v)
                if v in alive and v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) != len(remaining)

    # -- misc --------------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "agent_count": self.agent_count,
            "edges": [list(e) for e in self.edges],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CommGraph":
        return cls(data["agent_count"], data["edges"])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, CommGraph)
            and self.agent_count == other.agent_count
            and self.edges == other.edges
        )

    def __repr__(self) -> str:
        return f"CommGraph(agent_count={self.agent_count}, edges={len(self.edges)})"


# -- topology generators ---------------------------------------------------


def _random_connected_edges(n: int, edge_prob: float, rng) -> list[tuple[int, int]]:
    """Erdos-Renyi sample, then augment with bridges until connected."""
    edges = set()
    for a in range(n):
        for b in range(a + 1, n):
            if rng.random() < edge_prob:
                edges.add((a, b))
    # Union components with random bridges until one component remains.
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        parent[find(a)] = find(b)
    roots = sorted({find(v) for v in range(n)})
    while len(roots) > 1:
        comp_a = [v for v in range(n) if find(v) == roots[0]]
        comp_b = [v for v in range(n) if find(v) == roots[1]]
        a = int(rng.choice(comp_a))
        b = int(rng.choice(comp_b))
        edges.add((min(a, b), max(a, b)))
        parent[find(a)] = find(b)
        roots = sorted({find(v) for v in range(n)})
    return sorted(edges)


def make_topology(kind: str, n: int, *, edge_prob: float = 0.2,
                  seed: int | None = None, diameter: int | None = None,
                  max_tries: int = 500) -> CommGraph:
    """Build a named topology.

    Kinds:
        ring, path, star, complete: deterministic shapes.
        random: connected Erdos-Renyi(n, edge_prob), augmented with bridges
            if the raw sample is disconnected (seeded, deterministic).
        random_diameter: like ``random`` but resampled until the diameter
            equals ``diameter`` exactly.

    Raises:
        GraphError: unknown kind, bad parameters, or (for random_diameter)
            no matching sample within ``max_tries`` attempts.
    """
    n = int(n)
    if n < 1:
        raise GraphError("n must be >= 1")
    if kind == "ring":
        if n == 1:
            return CommGraph(1, [])
        if n == 2:
            return CommGraph(2, [(0, 1)])
        return CommGraph(n, [(i, (i + 1) % n) for i in range(n)])
    if kind == "path":
        return CommGraph(n, [(i, i + 1) for i in range(n - 1)])
    if kind == "star":
        return CommGraph(n, [(0, i) for i in range(1, n)])
    if kind == "complete":
        return CommGraph(n, [(a, b) for a in range(n) for b in range(a + 1, n)])
    if kind == "random":
        rng = np.random.default_rng(seed)
        return CommGraph(n, _random_connected_edges(n, edge_prob, rng))
    if kind == "random_diameter":
        if diameter is None:
            raise GraphError("random_diameter requires a target diameter")
        root = np.random.default_rng(seed)
        for _ in range(max_tries):
            g = CommGraph(n, _random_connected_edges(n, edge_prob, root))
            if g.diameter() == diameter:
                return g
        raise GraphError(
            f"no {n}-agent random graph with diameter {diameter} found in "
            f"{max_tries} tries (edge_prob={edge_prob})"
        )
    raise GraphError(f"unknown topology kind {kind!r}; expected one of {TOPOLOGY_KINDS}")
