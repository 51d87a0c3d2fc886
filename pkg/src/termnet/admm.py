"""Consensus ADMM on quadratic objectives, used as a live criterion source.

Each agent owns a strictly convex quadratic ``0.5 x'Qx + q'x`` over its
private variables.  Coupling comes from shared scalar variables: a shared
variable names one coordinate of each of two adjacent agents and requires
them to agree at the optimum.  The agents run scaled-form consensus ADMM
over those pairs, and each agent's local stopping test is the infinity
norm of its consensus mismatches falling below a tolerance.

``solve_pooled`` solves the same problem centrally (merge shared
coordinates, one linear solve) and is the accuracy reference for tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .criteria import admm_criterion
from .errors import ScenarioError


@dataclass(frozen=True)
class SharedVariable:
    """Equality constraint x_a[index_a] == x_b[index_b] between two agents."""

    agent_a: int
    index_a: int
    agent_b: int
    index_b: int

    def to_dict(self) -> dict:
        return {
            "agent_a": self.agent_a,
            "index_a": self.index_a,
            "agent_b": self.agent_b,
            "index_b": self.index_b,
        }


@dataclass
class AdmmProblem:
    """Problem data plus the solver/criterion knobs kept alongside it."""

    quadratics: list
    linears: list
    shared: list
    rho: float = 1.0
    tolerance: float = 1e-2
    latch: bool = True

    def __post_init__(self):
        self.quadratics = [np.asarray(Q, dtype=float) for Q in self.quadratics]
        self.linears = [np.asarray(q, dtype=float) for q in self.linears]
        if len(self.quadratics) != len(self.linears):
            raise ScenarioError("quadratic and linear term counts differ")
        for i, (Q, q) in enumerate(zip(self.quadratics, self.linears)):
            if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
                raise ScenarioError(f"agent {i}: quadratic term is not square")
            if q.shape != (Q.shape[0],):
                raise ScenarioError(f"agent {i}: linear term has wrong length")
            if not np.allclose(Q, Q.T):
                raise ScenarioError(f"agent {i}: quadratic term is not symmetric")
            try:
                np.linalg.cholesky(Q)
            except np.linalg.LinAlgError:
                raise ScenarioError(
                    f"agent {i}: quadratic term is not positive definite"
                ) from None
        if self.rho <= 0:
            raise ScenarioError("rho must be positive")
        if self.tolerance <= 0:
            raise ScenarioError("tolerance must be positive")
        for s in self.shared:
            for agent, index in ((s.agent_a, s.index_a), (s.agent_b, s.index_b)):
                if not 0 <= agent < self.agent_count:
                    raise ScenarioError(f"shared variable names unknown agent {agent}")
                if not 0 <= index < self.dimension(agent):
                    raise ScenarioError(
                        f"shared variable index {index} out of range for agent {agent}"
                    )
            if s.agent_a == s.agent_b:
                raise ScenarioError("shared variable must join two distinct agents")

    @property
    def agent_count(self) -> int:
        return len(self.quadratics)

    def dimension(self, agent: int) -> int:
        return self.quadratics[agent].shape[0]

    def edges_used(self) -> set:
        return {
            (min(s.agent_a, s.agent_b), max(s.agent_a, s.agent_b))
            for s in self.shared
        }

    def to_dict(self) -> dict:
        return {
            "kind": "admm",
            "quadratics": [Q.tolist() for Q in self.quadratics],
            "linears": [q.tolist() for q in self.linears],
            "shared": [s.to_dict() for s in self.shared],
            "rho": self.rho,
            "tolerance": self.tolerance,
            "latch": self.latch,
        }


def make_consensus_problem(graph, seed: int = 0, *, rho: float = 1.0,
                           tolerance: float = 1e-2, latch: bool = True,
                           min_dim: int = 1, max_dim: int = 3) -> AdmmProblem:
    """Random strictly convex consensus problem with one shared scalar per edge."""
    rng = np.random.default_rng(seed)
    n = graph.agent_count
    dims = rng.integers(min_dim, max_dim + 1, size=n)
    quadratics, linears = [], []
    for i in range(n):
        p = int(dims[i])
        a = rng.normal(size=(p, p))
        quadratics.append(a @ a.T + (0.5 + rng.random()) * np.eye(p))
        linears.append(rng.normal(scale=2.0, size=p))
    shared = []
    for (i, j) in graph.edges:
        shared.append(
            SharedVariable(i, int(rng.integers(dims[i])), j, int(rng.integers(dims[j])))
        )
    return AdmmProblem(quadratics, linears, shared, rho=rho,
                       tolerance=tolerance, latch=latch)


def solve_pooled(problem: AdmmProblem) -> list:
    """Reference solution: merge shared coordinates and solve once centrally."""
    n = problem.agent_count
    offsets = np.concatenate(([0], np.cumsum([problem.dimension(i) for i in range(n)])))
    total = int(offsets[-1])
    parent = list(range(total))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for s in problem.shared:
        ra = find(int(offsets[s.agent_a]) + s.index_a)
        rb = find(int(offsets[s.agent_b]) + s.index_b)
        if ra != rb:
            parent[rb] = ra

    roots = sorted({find(a) for a in range(total)})
    slot = {root: pos for pos, root in enumerate(roots)}
    col = np.array([slot[find(a)] for a in range(total)])

    m = len(roots)
    Q = np.zeros((m, m))
    q = np.zeros(m)
    for i in range(n):
        idx = col[int(offsets[i]): int(offsets[i + 1])]
        # np.add.at, not fancy-index +=: an agent can own several copies of
        # one merged coordinate, and duplicates must accumulate.
        np.add.at(Q, (idx[:, None], idx[None, :]), problem.quadratics[i])
        np.add.at(q, idx, problem.linears[i])
    pooled = np.linalg.solve(Q, -q)
    return [pooled[col[int(offsets[i]): int(offsets[i + 1])]].copy() for i in range(n)]


class AdmmSolver:
    """Scaled-form consensus ADMM iterations over the shared-variable pairs."""

    def __init__(self, problem: AdmmProblem):
        self.problem = problem
        n = problem.agent_count
        self.x = [np.zeros(problem.dimension(i)) for i in range(n)]
        self.z = np.zeros(len(problem.shared))
        self.dual_a = np.zeros(len(problem.shared))
        self.dual_b = np.zeros(len(problem.shared))
        self._touching = [[] for _ in range(n)]
        for s_id, s in enumerate(problem.shared):
            self._touching[s.agent_a].append((s_id, s.index_a, "a"))
            self._touching[s.agent_b].append((s_id, s.index_b, "b"))
        rho = problem.rho
        self._systems = []
        for i in range(n):
            M = problem.quadratics[i].copy()
            for _, index, _ in self._touching[i]:
                M[index, index] += rho
            self._systems.append(M)

    def step(self, active_mask=None) -> np.ndarray:
        """One synchronous round; returns each agent's mismatch (inf-norm).

        Agents outside ``active_mask`` keep their iterate frozen; the
        consensus and dual updates still run so the shared state stays
        well defined around them.
        """
        problem = self.problem
        rho = problem.rho
        n = problem.agent_count
        for i in range(n):
            if active_mask is not None and not active_mask[i]:
                continue
            rhs = -problem.linears[i].copy()
            for s_id, index, side in self._touching[i]:
                dual = self.dual_a[s_id] if side == "a" else self.dual_b[s_id]
                rhs[index] += rho * (self.z[s_id] - dual)
            self.x[i] = np.linalg.solve(self._systems[i], rhs)
        mismatch = np.zeros(n)
        for s_id, s in enumerate(problem.shared):
            va = self.x[s.agent_a][s.index_a]
            vb = self.x[s.agent_b][s.index_b]
            self.z[s_id] = 0.5 * (va + self.dual_a[s_id] + vb + self.dual_b[s_id])
            self.dual_a[s_id] += va - self.z[s_id]
            self.dual_b[s_id] += vb - self.z[s_id]
            gap = abs(va - vb)
            mismatch[s.agent_a] = max(mismatch[s.agent_a], gap)
            mismatch[s.agent_b] = max(mismatch[s.agent_b], gap)
        return mismatch

    def iterate_copy(self) -> list:
        return [x.copy() for x in self.x]

    def max_error_against(self, reference) -> float:
        return max(
            float(np.max(np.abs(x - r))) if x.size else 0.0
            for x, r in zip(self.x, reference)
        )


def run_to_convergence(solver: AdmmSolver, reference, accuracy: float,
                       max_rounds: int = 200_000) -> int | None:
    """Iterate until every coordinate is within ``accuracy`` of ``reference``."""
    for rounds in range(1, max_rounds + 1):
        solver.step()
        if solver.max_error_against(reference) <= accuracy:
            return rounds
    return None


class AdmmCriterionSource:
    """Adapter that lets the simulator drive an ADMM run as its criterion.

    Each call to ``bits(t)`` advances the solver one round and converts the
    mismatch values into criterion bits.  ``compute_mask`` marks the agents
    that actually perform their update this round (the reduced-computation
    mode and already-terminated agents freeze their iterate).
    """

    def __init__(self, problem: AdmmProblem):
        self.problem = problem
        self.solver = AdmmSolver(problem)
        self._bits = np.zeros(problem.agent_count, dtype=np.uint8)
        self._next_t = 1
        self.global_iterate: list | None = None
        self.global_iteration: int | None = None

    @property
    def agent_count(self) -> int:
        return self.problem.agent_count

    def bits(self, t: int, compute_mask=None) -> np.ndarray:
        if t != self._next_t:
            raise ScenarioError(
                f"ADMM source stepped out of order: expected {self._next_t}, got {t}"
            )
        self._next_t += 1
        mismatch = self.solver.step(compute_mask)
        prob = self.problem
        self._bits = np.array(
            [
                admm_criterion(float(mismatch[i]), prob.tolerance,
                               int(self._bits[i]), prob.latch)
                for i in range(prob.agent_count)
            ],
            dtype=np.uint8,
        )
        if self.global_iterate is None and self._bits.all():
            self.global_iterate = self.solver.iterate_copy()
            self.global_iteration = t
        return self._bits.copy()
