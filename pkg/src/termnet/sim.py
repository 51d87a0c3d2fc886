"""Round-based synchronous simulator.

Drives either protocol over a communication graph with a one-iteration
message delay: everything an agent reads at iteration ``t`` was sent at the
end of ``t - 1``.  Fault scripts corrupt outbound messages between
snapshot and delivery; the sender's own state stays honest.

Three execution routes step the agents — per-agent serial, per-agent
thread-pool, and whole-round array kernels — and are held to identical
traces by the tests.  The engine records per-round counts, clear/clamp
events, misbehavior accusations, and enough history to measure false-entry
persistence and reduced-computation savings after the run.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .admm import AdmmCriterionSource, AdmmProblem
from .basic import BasicMessage, BasicTermState, step_basic
from .criteria import Schedule, first_global_iteration
from .errors import ScenarioError, SimulationInvariantError, TermnetError
from .faults import FaultScript, corrupt_basic_message, corrupt_ft_message
from .ft import FtMessage, FtTermState, step_ft
from .graph import CommGraph

METHODS = ("basic", "fault_tolerant")
EXECUTION_MODES = ("vectorized", "serial", "parallel")


# ---------------------------------------------------------------------------
# scenario


@dataclass
class Scenario:
    """Everything one simulated run needs, minus runtime state."""

    graph: CommGraph
    criterion: object
    method: str = "basic"
    faults: tuple = ()
    max_iterations: int = 10_000
    execution: str = "vectorized"
    strict_verbatim: bool = False
    prose_correction_constant: bool = False
    reduced_computation: bool = False
    name: str = ""
    seed: int | None = None

    def __post_init__(self):
        self.faults = tuple(self.faults)

    @property
    def agent_count(self) -> int:
        return self.graph.agent_count

    def faulty_agents(self) -> list[int]:
        return sorted({s.agent for s in self.faults})

    def criterion_monotone(self) -> bool:
        if isinstance(self.criterion, Schedule):
            return self.criterion.is_monotone()
        if isinstance(self.criterion, AdmmProblem):
            return self.criterion.latch
        return False

    def validate(self) -> list[str]:
        """Check hard requirements, return soft warnings.

        Hard violations (malformed scripts, criteria the method cannot
        support) raise ``ScenarioError``.  Conditions that only void the
        formal guarantees — faulty agents forming a cut set, or the
        last-satisfying agent being faulty — come back as warnings and mark
        the affected propositions as suppressed.
        """
        warnings: list[str] = []
        if self.method not in METHODS:
            raise ScenarioError(f"unknown method {self.method!r}")
        if self.execution not in EXECUTION_MODES:
            raise ScenarioError(f"unknown execution mode {self.execution!r}")
        if self.max_iterations < 1:
            raise ScenarioError("max_iterations must be >= 1")

        n = self.graph.agent_count
        if isinstance(self.criterion, Schedule):
            if self.criterion.agent_count != n:
                raise ScenarioError(
                    f"schedule covers {self.criterion.agent_count} agents, "
                    f"graph has {n}"
                )
        elif isinstance(self.criterion, AdmmProblem):
            if self.criterion.agent_count != n:
                raise ScenarioError(
                    f"problem covers {self.criterion.agent_count} agents, "
                    f"graph has {n}"
                )
            edges = set(self.graph.edges)
            for e in sorted(self.criterion.edges_used()):
                if e not in edges:
                    raise ScenarioError(
                        f"shared variable joins non-adjacent agents {e}"
                    )
        else:
            raise ScenarioError(
                f"criterion must be a Schedule or AdmmProblem, "
                f"got {type(self.criterion).__name__}"
            )

        if self.method == "basic" and not self.criterion_monotone():
            raise ScenarioError(
                "the basic method requires a monotone local criterion; "
                "use a latched criterion or the fault-tolerant method"
            )
        if self.method == "fault_tolerant" and isinstance(self.criterion, Schedule):
            window = self.graph.diameter() + n - 1
            bad = self.criterion.reset_violations(window)
            if bad:
                agent, t = bad[0]
                raise ScenarioError(
                    f"criterion reset for agent {agent} at iteration {t} after "
                    f"holding {window}+ rounds; the protocol cannot recover "
                    "from resets of fully aged entries"
                )

        seen = set()
        for script in self.faults:
            script.validate(n)
            if script.agent in seen:
                raise ScenarioError(
                    f"multiple fault scripts for agent {script.agent}"
                )
            seen.add(script.agent)

        if self.faults:
            if self.method == "basic":
                warnings.append(
                    "basic method has no defense against corrupted messages; "
                    "run demonstrates the failure mode only"
                )
            faulty = self.faulty_agents()
            if self.graph.is_cutset(faulty):
                warnings.append(
                    f"faulty agents {faulty} form a cut set; correctness "
                    "guarantees are suppressed"
                )
            if isinstance(self.criterion, Schedule):
                times = [
                    ft for ft in self.criterion.first_true if ft is not None
                ]
                if times and len(times) == self.criterion.agent_count:
                    last = max(times)
                    last_set = {
                        i for i, ft in enumerate(self.criterion.first_true)
                        if ft == last
                    }
                    if last_set & set(faulty):
                        warnings.append(
                            "a last-satisfying agent is faulty; "
                            "correctness guarantees are suppressed"
                        )
        if self.strict_verbatim and self.method != "basic":
            warnings.append("strict_verbatim only affects the basic method")
        if self.prose_correction_constant and self.method != "fault_tolerant":
            warnings.append(
                "prose_correction_constant only affects the fault-tolerant method"
            )
        return warnings


# ---------------------------------------------------------------------------
# trace recording


@dataclass
class TraceConfig:
    """Where and how to keep the per-agent round trace."""

    path: Path | None = None
    fmt: str = "csv"
    memory_cap_rows: int = 200_000


TRACE_COLUMNS = ("iteration", "agent", "bit", "vector", "scalar", "stamps",
                 "countdown", "full", "stopped")


class TraceRecorder:
    """Row buffer with an in-memory cap and optional streaming file sink."""

    def __init__(self, config: TraceConfig):
        if config.fmt not in ("csv", "jsonl"):
            raise ScenarioError(f"unknown trace format {config.fmt!r}")
        self.config = config
        self.rows: list[dict] = []
        self.total_rows = 0
        self.truncated = False
        self._fh = None
        self._writer = None
        if config.path is not None:
            self._fh = open(config.path, "w", newline="")
            if config.fmt == "csv":
                self._writer = csv.DictWriter(self._fh, fieldnames=TRACE_COLUMNS)
                self._writer.writeheader()

    def add(self, row: dict) -> None:
        self.total_rows += 1
        if len(self.rows) < self.config.memory_cap_rows:
            self.rows.append(row)
        else:
            self.truncated = True
        if self._fh is not None:
            if self._writer is not None:
                self._writer.writerow(row)
            else:
                self._fh.write(json.dumps(row, sort_keys=True) + "\n")

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def summary(self) -> dict:
        return {
            "path": str(self.config.path) if self.config.path else None,
            "format": self.config.fmt,
            "total_rows": self.total_rows,
            "rows_in_memory": len(self.rows),
            "truncated": self.truncated,
        }


# ---------------------------------------------------------------------------
# report


@dataclass
class RunReport:
    """Everything observed during one run.

    Scalar facts serialize through ``to_dict``; the bulky per-round arrays
    (``v_hist``, ``bits_hist``, ``compute_hist``) stay as attributes for
    in-process analysis.
    """

    name: str
    method: str
    execution: str
    backend: str
    agent_count: int
    diameter: int
    seed: int | None
    flags: dict
    iterations_run: int
    exhausted: bool
    stop_iterations: list
    common_stop: int | None
    simultaneous: bool
    global_iteration: int | None
    first_true: list
    last_satisfiers: list
    counts_locally_satisfied: list
    counts_full_vector: list
    counts_stopped: list
    max_single_persistence: int
    max_global_persistence: int
    clear_events: list
    clamp_count: int
    fault_reports: list
    faulty_agents: list
    fault_last_active: int | None
    post_stop_dependencies: int
    p1_violations: int | None
    p2_violations: int | None
    computation_rounds: list
    monotone_criterion: bool
    a4_cutset_violated: bool
    a5_last_satisfier_faulty: bool
    warnings: list
    trace: dict | None
    v_hist: np.ndarray = field(repr=False, default=None)
    bits_hist: np.ndarray = field(repr=False, default=None)
    compute_hist: np.ndarray = field(repr=False, default=None)

    def to_dict(self) -> dict:
        out = {}
        for key, value in self.__dict__.items():
            if key in ("v_hist", "bits_hist", "compute_hist"):
                continue
            out[key] = value
        return out

    def to_json(self, **kwargs) -> str:
        kwargs.setdefault("sort_keys", True)
        kwargs.setdefault("indent", 2)
        return json.dumps(self.to_dict(), **kwargs)


# ---------------------------------------------------------------------------
# post-run measurements


def longest_true_run(flags: np.ndarray) -> np.ndarray:
    """Longest consecutive-True streak per column of a (rounds, m) array."""
    m = flags.shape[1] if flags.ndim > 1 else 0
    run = np.zeros(m, dtype=np.int64)
    best = np.zeros(m, dtype=np.int64)
    for row in flags:
        run = np.where(row, run + 1, 0)
        best = np.maximum(best, run)
    return best


def measure_persistence(v_hist: np.ndarray, bits_hist: np.ndarray,
                        exclude=(), exclude_subjects=()) -> tuple[int, int]:
    """Longest false-entry streaks over a recorded run.

    ``v_hist`` is (rounds, n, n) end-of-iteration vectors, ``bits_hist``
    (rounds, n) realized criterion bits.  An entry ``(i, k)`` is false at
    a round when agent ``i`` holds it while agent ``k``'s bit is 0; a
    vector is falsely full when it is full while some bit is 0.  Rows in
    ``exclude`` (the scripted faulty agents) are ignored — their vectors
    are not claims anyone relies on.  Columns in ``exclude_subjects``
    (normally the same faulty agents) are ignored for the single-entry
    streak: clearing a false entry relies on the subject's truthful zero
    reaching the rest of the network, and a faulty subject can suppress
    that evidence — by lying about its own entry, or because its only
    routes into the honest subgraph run through other faulty agents — so
    no finite bound applies to entries about faulty subjects.

    Returns ``(max_single_entry, max_full_vector)`` streak lengths.
    """
    if v_hist.size == 0:
        return 0, 0
    rounds, n, _ = v_hist.shape
    keep = np.array([i for i in range(n) if i not in set(exclude)], dtype=int)
    if keep.size == 0:
        return 0, 0
    keep_cols = np.array([k for k in range(n) if k not in set(exclude_subjects)],
                         dtype=int)
    false_entry = ((v_hist[:, keep, :][:, :, keep_cols] != 0)
                   & (bits_hist[:, None, keep_cols] == 0))
    max_single = int(longest_true_run(false_entry.reshape(rounds, -1)).max(initial=0))

    full = (v_hist[:, keep, :] != 0).all(axis=2)
    premature = full & ~(bits_hist != 0).all(axis=1)[:, None]
    max_global = int(longest_true_run(premature).max(initial=0))
    return max_single, max_global


def savings_fraction(report: RunReport) -> float:
    """Fraction of the termination tail each agent skipped computing.

    Only meaningful for a terminated run: the window is the iterations
    after the global criterion first held up to the common stop, and the
    fraction is the minimum over agents of skipped rounds over the window
    length.  With reduced computation on, an agent skips every round that
    starts with its vector already full.
    """
    if report.common_stop is None or not report.simultaneous:
        raise TermnetError("savings fraction needs a simultaneously terminated run")
    if report.global_iteration is None:
        raise TermnetError("savings fraction needs a realized global iteration")
    start = report.global_iteration  # window covers (start, common_stop]
    stop = report.common_stop
    if stop <= start:
        raise TermnetError("termination did not outlast the global iteration")
    window = report.compute_hist[start:stop]  # rows are iterations start+1..stop
    skipped = (~(window != 0)).sum(axis=0)
    return float(skipped.min()) / float(stop - start)


# ---------------------------------------------------------------------------
# engine


def _detect_from_matrices(adj, live, v_end_tm3, v_end_tm2, msgs):
    """Matrix form of the misbehavior detector for one iteration.

    ``msgs`` holds the three newest delivered vector matrices, stamped
    ``t-3``, ``t-2``, ``t-1`` in that order.  Accuse ``j`` about ``k``
    when the accuser cleared ``k`` at ``t - 2`` while ``j`` asserted ``k``
    in all three messages.  Matches ``ft.detect_faulty_neighbors``.
    """
    vm3, vm2, vm1 = msgs
    cleared = (v_end_tm3 != 0) & (v_end_tm2 == 0)
    asserted = (vm3 != 0) & (vm2 != 0) & (vm1 != 0)
    accuse = adj[:, :, None] & cleared[:, None, :] & asserted[None, :, :]
    accuse &= live[:, None, None]
    return np.argwhere(accuse)


def _trace_vector(row: np.ndarray) -> str:
    return "".join("1" if x else "0" for x in row)


def _trace_ints(row: np.ndarray) -> str:
    return "|".join(str(int(x)) for x in row)


class _EngineState:
    """Stacked protocol state shared by all execution routes."""

    def __init__(self, n: int, ft: bool):
        self.V = np.zeros((n, n), dtype=np.uint8)
        self.T = np.zeros(n, dtype=np.int64)
        self.ft = ft
        if ft:
            self.V1 = np.zeros((n, n), dtype=np.uint8)  # end of t-2
            self.V2 = np.zeros((n, n), dtype=np.uint8)  # end of t-3
            self.U = np.zeros((n, n), dtype=np.int64)
            self.RU = np.zeros((n, n), dtype=np.int64)


def run(scenario: Scenario, trace: TraceConfig | None = None) -> RunReport:
    """Simulate a scenario to termination or iteration exhaustion."""
    warnings = scenario.validate()
    graph = scenario.graph
    n = graph.agent_count
    diameter = graph.diameter()
    distances = graph.distance_matrix()
    adj = graph.adjacency_matrix()
    topo = _kernels.topology_arrays(graph)
    neighbor_lists = [graph.neighbors(i) for i in range(n)]

    ft = scenario.method == "fault_tolerant"
    include_self = not scenario.strict_verbatim
    correction_doubled = not scenario.prose_correction_constant
    correction = (2 * diameter if correction_doubled else diameter) + n - 1
    stop_threshold = 2 * diameter + n - 1 if ft else diameter

    if isinstance(scenario.criterion, AdmmProblem):
        source = AdmmCriterionSource(scenario.criterion)
    else:
        source = scenario.criterion

    faulty = scenario.faulty_agents()
    scripts = {s.agent: s for s in scenario.faults}
    fault_last = max((s.last_active() for s in scenario.faults), default=None)
    monotone = scenario.criterion_monotone()
    checks_on = not scenario.faults and monotone
    a4_violated = bool(scenario.faults) and graph.is_cutset(faulty)
    clean_mode = checks_on  # theory guarantees simultaneity here

    state = _EngineState(n, ft)
    # Delivered messages for the next round; round 1 reads the zero state
    # everyone "sent" at the end of iteration 0.
    v_msg = np.zeros((n, n), dtype=np.uint8)
    u_msg = np.zeros((n, n), dtype=np.int64)
    t_msg = np.zeros(n, dtype=np.int64)
    last_sent_v = {a: v_msg[a].copy() for a in faulty}
    last_sent_u = {a: u_msg[a].copy() for a in faulty}
    msg_v_hist: list[np.ndarray] = [v_msg]

    stop_iter = np.full(n, -1, dtype=np.int64)
    b_prev = np.zeros(n, dtype=np.uint8)
    v_hist: list[np.ndarray] = []
    bits_hist: list[np.ndarray] = []
    compute_hist: list[np.ndarray] = []
    counts_sat: list[int] = []
    counts_full: list[int] = []
    counts_stopped: list[int] = []
    clear_events: list[dict] = []
    clamp_count = 0
    fault_reports: list[dict] = []
    accused_seen: set = set()
    post_stop_dependencies = 0
    p1_violations = 0 if checks_on else None
    p2_violations = 0 if checks_on else None
    first_true = np.full(n, -1, dtype=np.int64)
    global_iteration: int | None = None

    recorder = TraceRecorder(trace) if trace is not None else None
    pool = (ThreadPoolExecutor(max_workers=min(8, n))
            if scenario.execution == "parallel" else None)

    def step_agents_basic(live, bits, t):
        if scenario.execution == "vectorized":
            new_v, new_t, stops = _kernels.basic_round(
                state.V, state.T, v_msg, t_msg, topo, bits, t, diameter,
                include_self)
            return new_v, new_t, stops
        new_v = state.V.copy()
        new_t = state.T.copy()
        stops = np.zeros(n, dtype=bool)

        def one(i):
            inbox = [
                BasicMessage(j, v_msg[j], t_msg[j], t - 1)
                for j in neighbor_lists[i]
            ]
            st = BasicTermState(state.V[i], int(state.T[i]))
            return i, step_basic(
                i, st, bool(bits[i]), inbox, t, diameter, neighbor_lists[i],
                include_self_in_scalar_merge=include_self)

        ids = [i for i in range(n) if live[i]]
        results = pool.map(one, ids) if pool else map(one, ids)
        for i, (st, stop) in results:
            new_v[i] = st.v
            new_t[i] = st.t_scalar
            stops[i] = stop
        return new_v, new_t, stops

    def step_agents_ft(live, bits, t):
        if scenario.execution == "vectorized":
            return _kernels.ft_round(
                state.V, state.V1, state.U, state.RU, v_msg, u_msg, topo,
                bits, t, diameter, correction_doubled)
        new_v = state.V.copy()
        new_u = state.U.copy()
        new_ru = state.RU.copy()
        new_t = state.T.copy()
        stops = np.zeros(n, dtype=bool)
        cleared = np.zeros((n, n), dtype=bool)
        clamps = 0

        def one(i):
            inbox = [
                FtMessage(j, v_msg[j], u_msg[j], int(t_msg[j]), t - 1)
                for j in neighbor_lists[i]
            ]
            st = FtTermState(state.V[i], state.V1[i], state.V2[i],
                             state.U[i], state.RU[i], int(state.T[i]))
            return i, step_ft(
                i, st, bool(bits[i]), inbox, t, diameter, neighbor_lists[i],
                correction_doubled=correction_doubled)

        ids = [i for i in range(n) if live[i]]
        results = pool.map(one, ids) if pool else map(one, ids)
        for i, (st, stop, events) in results:
            new_v[i] = st.v_now
            new_u[i] = st.u
            new_ru[i] = st.reject_until
            new_t[i] = st.t_scalar
            stops[i] = stop
            for ev in events.cleared:
                cleared[i, ev.subject] = True
            clamps += events.clamps
        return new_v, new_u, new_ru, new_t, stops, cleared, clamps

    t = 0
    exhausted = True
    try:
        for t in range(1, scenario.max_iterations + 1):
            live = stop_iter < 0

            # Post-termination dependencies: a live agent reading from a
            # stopped neighbor consumes a frozen snapshot the engine
            # refabricates.  In runs where the theory guarantees a common
            # stopping round this indicates a protocol bug, so fail loudly.
            if not live.all():
                dependent = live & (adj[:, ~live].any(axis=1))
                deps = int(dependent.sum())
                if deps and clean_mode:
                    raise SimulationInvariantError(
                        f"iteration {t}: {deps} live agents depend on "
                        "messages from terminated neighbors"
                    )
                post_stop_dependencies += deps

            full_prev = state.V.all(axis=1)
            if scenario.reduced_computation:
                compute = live & ~full_prev
            else:
                compute = live.copy()
            raw_bits = source.bits(t, compute)
            bits = np.where(compute, raw_bits, b_prev).astype(np.uint8)
            b_prev = bits
            newly_sat = (first_true < 0) & (bits != 0)
            first_true[newly_sat] = t
            if global_iteration is None and bits.all():
                global_iteration = t

            # Misbehavior detection runs on received messages before the
            # step consumes them.
            if ft and t >= 4:
                hits = _detect_from_matrices(
                    adj, live, v_hist[t - 4], v_hist[t - 3],
                    msg_v_hist[-3:])
                for i, j, k in hits:
                    key = (int(i), int(j), int(k))
                    if key not in accused_seen:
                        accused_seen.add(key)
                        fault_reports.append({
                            "accuser": key[0], "accused": key[1],
                            "subject": key[2], "iteration": t,
                        })

            if ft:
                u_before = state.U
                new_v, new_u, new_ru, new_t, stops, cleared, clamps = \
                    step_agents_ft(live, bits, t)
                if scenario.execution == "vectorized":
                    # The kernel stepped every row; discard updates for
                    # already-stopped agents.
                    frozen = ~live
                    if frozen.any():
                        cleared[frozen] = False
                        stops[frozen] = False
                        new_v[frozen] = state.V[frozen]
                        new_u[frozen] = state.U[frozen]
                        new_ru[frozen] = state.RU[frozen]
                        new_t[frozen] = state.T[frozen]
                        clamps = None  # recount below
                if clamps is None:
                    targets = u_before[cleared] + correction
                    clamps = int((targets < t).sum())
                clamp_count += clamps
                for i, k in np.argwhere(cleared):
                    prev_stamp = int(u_before[i, k])
                    clear_events.append({
                        "iteration": t, "agent": int(i), "subject": int(k),
                        "prev_stamp": prev_stamp,
                        "reject_until": int(new_ru[i, k]),
                        "clamped": prev_stamp + correction < t,
                    })
                state.V2 = np.where(live[:, None], state.V1, state.V2)
                state.V1 = np.where(live[:, None], state.V, state.V1)
                state.V = new_v
                state.U = new_u
                state.RU = new_ru
                state.T = new_t
            else:
                new_v, new_t, stops = step_agents_basic(live, bits, t)
                if scenario.execution == "vectorized":
                    frozen = ~live
                    if frozen.any():
                        stops[frozen] = False
                        new_v[frozen] = state.V[frozen]
                        new_t[frozen] = state.T[frozen]
                state.V = new_v
                state.T = new_t

            stop_iter[live & stops] = t

            # Online exactness checks for clean runs: every entry flips
            # exactly when the owner's satisfaction has had time to travel,
            # and no vector fills before the global criterion holds.
            if checks_on:
                known = first_true >= 0
                expected = known[None, :] & (
                    t >= first_true[None, :] + distances)
                if not np.array_equal(state.V != 0, expected):
                    p1_violations += 1
                if global_iteration is None and state.V.all(axis=1).any():
                    p2_violations += 1

            v_hist.append(state.V.copy())
            bits_hist.append(bits)
            compute_hist.append(compute.astype(np.uint8))
            counts_sat.append(int(bits.sum()))
            counts_full.append(int(state.V.all(axis=1).sum()))
            counts_stopped.append(int((stop_iter >= 0).sum()))

            if recorder is not None:
                for i in range(n):
                    recorder.add({
                        "iteration": t,
                        "agent": i,
                        "bit": int(bits[i]),
                        "vector": _trace_vector(state.V[i]),
                        "scalar": int(state.T[i]),
                        "stamps": _trace_ints(state.U[i]) if ft else "",
                        "countdown": _trace_ints(
                            np.maximum(state.RU[i] - t, 0)) if ft else "",
                        "full": int(bool(state.V[i].all())),
                        "stopped": int(stop_iter[i] >= 0),
                    })

            # Next round's deliveries: snapshot current state, then let
            # active fault scripts rewrite their agent's outbound copy.
            v_msg = state.V.copy()
            t_msg = state.T.copy()
            if ft:
                u_msg = state.U.copy()
            for a, script in scripts.items():
                if script.active(t):
                    if ft:
                        v_row, u_row = corrupt_ft_message(
                            script, v_msg[a], u_msg[a],
                            last_sent_v[a], last_sent_u[a], t)
                        v_msg[a] = v_row
                        u_msg[a] = u_row
                    else:
                        v_msg[a] = corrupt_basic_message(script, v_msg[a])
                last_sent_v[a] = v_msg[a].copy()
                if ft:
                    last_sent_u[a] = u_msg[a].copy()
            msg_v_hist.append(v_msg)
            if len(msg_v_hist) > 3:
                del msg_v_hist[0]

            if (stop_iter >= 0).all():
                exhausted = False
                break
    finally:
        if pool is not None:
            pool.shutdown()
        if recorder is not None:
            recorder.close()

    bits_arr = (np.stack(bits_hist) if bits_hist
                else np.zeros((0, n), dtype=np.uint8))
    v_arr = (np.stack(v_hist) if v_hist
             else np.zeros((0, n, n), dtype=np.uint8))
    compute_arr = (np.stack(compute_hist) if compute_hist
                   else np.zeros((0, n), dtype=np.uint8))

    max_single, max_global = measure_persistence(v_arr, bits_arr, faulty,
                                                 faulty)
    stops_list = [int(s) if s >= 0 else None for s in stop_iter]
    done = all(s is not None for s in stops_list)
    common = stops_list[0] if done and len(set(stops_list)) == 1 else None
    realized_global = first_global_iteration(bits_arr)

    realized_first = [int(ftt) if ftt >= 0 else None for ftt in first_true]
    known = [ftt for ftt in realized_first if ftt is not None]
    if known and len(known) == n:
        last_sat = max(known)
        last_satisfiers = [i for i, ftt in enumerate(realized_first)
                           if ftt == last_sat]
    else:
        last_satisfiers = []
    a5_violated = bool(scenario.faults) and bool(
        set(last_satisfiers) & set(faulty))

    monotone_realized = monotone
    if bits_arr.shape[0] > 1:
        drops = (bits_arr[:-1] != 0) & (bits_arr[1:] == 0)
        monotone_realized = not bool(drops.any())

    computation_rounds = []
    for i in range(n):
        upto = stops_list[i] if stops_list[i] is not None else t
        computation_rounds.append(int(compute_arr[:upto, i].sum()))

    report = RunReport(
        name=scenario.name,
        method=scenario.method,
        execution=scenario.execution,
        backend=(_kernels.ACTIVE_BACKEND
                 if scenario.execution == "vectorized" else "per-agent"),
        agent_count=n,
        diameter=diameter,
        seed=scenario.seed,
        flags={
            "strict_verbatim": scenario.strict_verbatim,
            "prose_correction_constant": scenario.prose_correction_constant,
            "reduced_computation": scenario.reduced_computation,
        },
        iterations_run=t,
        exhausted=exhausted,
        stop_iterations=stops_list,
        common_stop=common,
        simultaneous=done and common is not None,
        global_iteration=realized_global,
        first_true=realized_first,
        last_satisfiers=last_satisfiers,
        counts_locally_satisfied=counts_sat,
        counts_full_vector=counts_full,
        counts_stopped=counts_stopped,
        max_single_persistence=max_single,
        max_global_persistence=max_global,
        clear_events=clear_events,
        clamp_count=clamp_count,
        fault_reports=fault_reports,
        faulty_agents=faulty,
        fault_last_active=fault_last,
        post_stop_dependencies=post_stop_dependencies,
        p1_violations=p1_violations,
        p2_violations=p2_violations,
        computation_rounds=computation_rounds,
        monotone_criterion=monotone_realized,
        a4_cutset_violated=a4_violated,
        a5_last_satisfier_faulty=a5_violated,
        warnings=warnings,
        trace=recorder.summary() if recorder is not None else None,
        v_hist=v_arr,
        bits_hist=bits_arr,
        compute_hist=compute_arr,
    )
    return report


# ---------------------------------------------------------------------------
# proposition checks


@dataclass(frozen=True)
class CheckResult:
    check: str
    status: str  # "pass" | "fail" | "skip"
    detail: str


def _expected_stop(report: RunReport) -> int:
    n = report.agent_count
    d = report.diameter
    if report.method == "fault_tolerant":
        return report.global_iteration + 2 * d + n - 1
    return report.global_iteration + d


def assert_propositions(report: RunReport) -> list[CheckResult]:
    """Evaluate the protocol guarantees this run was supposed to exhibit.

    Runs whose assumptions a guarantee needs (no faults, monotone
    criterion, faulty agents not a cut set, last satisfier honest) are
    checked against it; otherwise the check reports ``skip`` with the
    reason.  The command-line runner turns any ``fail`` into a nonzero
    exit.
    """
    checks: list[CheckResult] = []
    ftm = report.method == "fault_tolerant"
    n = report.agent_count
    d = report.diameter
    clean = not report.faulty_agents and report.monotone_criterion
    strict = report.flags.get("strict_verbatim", False)
    assumptions_ok = (not report.a4_cutset_violated
                      and not report.a5_last_satisfier_faulty)

    def add(check, status, detail=""):
        checks.append(CheckResult(check, status, detail))

    # exact propagation of satisfaction flips
    if clean and report.p1_violations is not None:
        status = "pass" if report.p1_violations == 0 else "fail"
        add("exact_propagation", status,
            f"{report.p1_violations} rounds deviated from distance-delayed bits")
    else:
        add("exact_propagation", "skip", "needs a fault-free monotone run")

    # no full vector before the global criterion holds
    if clean and report.p2_violations is not None:
        status = "pass" if report.p2_violations == 0 else "fail"
        add("full_vector_implies_global", status,
            f"{report.p2_violations} premature full-vector rounds")
    else:
        add("full_vector_implies_global", "skip",
            "needs a fault-free monotone run")

    # exact simultaneous stop
    check_name = "ft_exact_stop" if ftm else "simultaneous_exact_stop"
    if clean and not (strict and not ftm):
        if report.global_iteration is None:
            if any(s is not None for s in report.stop_iterations):
                add(check_name, "fail",
                    "agents stopped although the global criterion never held")
            else:
                add(check_name, "pass",
                    "global criterion never held and nobody stopped")
        elif report.exhausted:
            add(check_name, "fail",
                f"iteration budget exhausted at {report.iterations_run} "
                f"before the expected stop {_expected_stop(report)}")
        else:
            expected = _expected_stop(report)
            ok = (report.simultaneous and report.common_stop == expected)
            add(check_name, "pass" if ok else "fail",
                f"stops {report.stop_iterations} vs expected common stop "
                f"{expected}")
    else:
        reason = ("strict verbatim merge voids exact simultaneity"
                  if (strict and not ftm and clean)
                  else "needs a fault-free monotone run")
        add(check_name, "skip", reason)

    # false-entry persistence bound (the clearing wave needs the honest
    # agents to stay connected, so a cut-set run voids it)
    if ftm and report.faulty_agents and not report.a4_cutset_violated:
        bound = d + n - 2
        status = "pass" if report.max_single_persistence <= bound else "fail"
        add("persistence_bound", status,
            f"max false-entry persistence {report.max_single_persistence} "
            f"vs bound {bound}")
    elif ftm and report.faulty_agents:
        add("persistence_bound", "skip",
            "faulty agents form a cut set; bound not guaranteed")
    else:
        add("persistence_bound", "skip", "needs a fault-tolerant faulty run")

    # no termination before the global criterion
    if ftm and report.faulty_agents and assumptions_ok:
        # Only honest agents are protected: a faulty agent whose entire
        # neighborhood is also faulty can be fed a consistent false picture
        # and stop on it, without any honest agent being misled.
        bad = set(report.faulty_agents)
        stops = [s for i, s in enumerate(report.stop_iterations)
                 if s is not None and i not in bad]
        if report.global_iteration is None:
            status = "pass" if not stops else "fail"
            add("no_early_stop", status,
                f"{len(stops)} honest agents stopped without the global criterion")
        else:
            early = [s for s in stops if s < report.global_iteration]
            add("no_early_stop", "pass" if not early else "fail",
                f"honest stops before iteration {report.global_iteration}: {early}")
    elif ftm and report.faulty_agents:
        add("no_early_stop", "skip",
            "cut-set or faulty-last-satisfier run voids the guarantee")
    else:
        add("no_early_stop", "skip", "needs a fault-tolerant faulty run")

    # appropriate termination once faults cease in time
    if (ftm and report.faulty_agents and assumptions_ok
            and report.global_iteration is not None
            and report.fault_last_active is not None
            and report.fault_last_active <= report.global_iteration):
        floor = report.global_iteration + 2 * d + n - 1
        ok = (not report.exhausted and report.simultaneous
              and report.common_stop is not None
              and report.common_stop >= floor)
        add("post_fault_stop", "pass" if ok else "fail",
            f"common stop {report.common_stop} (floor {floor}, "
            f"simultaneous={report.simultaneous})")
    else:
        add("post_fault_stop", "skip",
            "needs faults ceasing before the global criterion under "
            "intact assumptions")

    # all clearers of one disputed stamp agree on the refusal window
    if ftm and report.clear_events:
        groups: dict = {}
        for ev in report.clear_events:
            if ev["clamped"]:
                continue
            groups.setdefault((ev["subject"], ev["prev_stamp"]),
                              set()).add(ev["reject_until"])
        bad = {k: v for k, v in groups.items() if len(v) > 1}
        clamped = sum(1 for ev in report.clear_events if ev["clamped"])
        add("correction_window_agreement", "pass" if not bad else "fail",
            f"{len(groups)} disputed stamps, {clamped} clamped clears"
            + (f", disagreements: {bad}" if bad else ""))
    else:
        add("correction_window_agreement", "skip",
            "no correction events to compare")

    # honest agents' accusations only ever name scripted faulty agents
    # (a faulty agent's own reports are as untrustworthy as its messages:
    # its neighbors saw the corrupted outbound, not the state its local
    # detector reasons from)
    if ftm:
        faulty = set(report.faulty_agents)
        accused = {r["accused"] for r in report.fault_reports
                   if r["accuser"] not in faulty}
        wrong = accused - faulty
        status = "pass" if not wrong else "fail"
        add("detector_soundness", status,
            f"honest accusers named {sorted(accused)} vs scripted "
            f"{report.faulty_agents}")
    else:
        add("detector_soundness", "skip", "detector is part of the "
            "fault-tolerant method")

    return checks


def failed_checks(checks: list[CheckResult]) -> list[CheckResult]:
    return [c for c in checks if c.status == "fail"]
