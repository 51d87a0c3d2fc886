"""Fault-tolerant distributed termination detection.

Extends the basic vector protocol so that a corrupted message cannot stop
the network early.  Each entry carries the iteration stamp at which the
owner recorded satisfaction; relayed entries are only accepted while that
stamp is at most one diameter old.  An entry held for two consecutive
rounds that a neighbor retracts (or stamps differently) is treated as
evidence of a fault: the holder clears the entry, bumps its scalar, and
refuses updates for that entry until a reject-until iteration that every
affected agent computes identically from the disputed stamp.  Owners
re-assert their own entry with a fresh stamp once their window expires, so
genuine progress survives any number of corrupted messages from agents
that do not disconnect the graph.

Stopping requires a full vector that has been stable for
``2 * diameter + agent_count - 1`` iterations past the newest stamp.

Like the basic variant, ``step_ft`` is pure: serial, thread-pool, and
array-kernel execution produce identical traces.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import MessageError


@dataclass(frozen=True)
class FtTermState:
    """Protocol state of one agent after completing iteration ``t``.

    ``v_now``, ``v_prev`` and ``v_prev2`` are the status vectors at the end
    of iterations ``t``, ``t-1`` and ``t-2``.  Two rounds of history feed
    the discrepancy rule; the third is what the misbehavior detector needs.
    ``reject_until[k]`` is the last iteration through which updates to entry
    ``k`` are refused (the on-the-wire countdown form is derived from it).
    """

    v_now: np.ndarray
    v_prev: np.ndarray
    v_prev2: np.ndarray
    u: np.ndarray
    reject_until: np.ndarray
    t_scalar: int

    def countdown(self, t: int) -> np.ndarray:
        """Remaining refusal rounds per entry, as seen after iteration ``t``."""
        return np.maximum(self.reject_until - t, 0)

    def copy(self) -> "FtTermState":
        return FtTermState(self.v_now.copy(), self.v_prev.copy(),
                           self.v_prev2.copy(), self.u.copy(),
                           self.reject_until.copy(), self.t_scalar)


@dataclass(frozen=True)
class FtMessage:
    """Snapshot of a sender's state at the end of ``iteration``."""

    sender: int
    v: np.ndarray
    u: np.ndarray
    t_scalar: int
    iteration: int


@dataclass(frozen=True)
class ClearEvent:
    """One entry cleared through the correction path."""

    subject: int
    prev_stamp: int
    reject_until: int
    clamped: bool


@dataclass(frozen=True)
class FaultReport:
    """Accusation that ``accused``'s outbound messages were corrupted."""

    accuser: int
    accused: int
    subject: int
    iteration: int


@dataclass
class StepEvents:
    """What one fault-tolerant step did beyond the plain state update."""

    cleared: list[ClearEvent] = field(default_factory=list)
    clamps: int = 0


def init_ft(agent_count: int) -> FtTermState:
    """Zeroed state: nothing known, no refusals, scalar at 0."""
    z = np.zeros(agent_count, dtype=np.uint8)
    return FtTermState(z, z.copy(), z.copy(),
                       np.zeros(agent_count, dtype=np.int64),
                       np.zeros(agent_count, dtype=np.int64), 0)


def outbound_ft(agent_id: int, state: FtTermState, t: int) -> FtMessage:
    """Message the agent sends at the end of iteration ``t``."""
    return FtMessage(agent_id, state.v_now.copy(), state.u.copy(),
                     state.t_scalar, t)


def stamp_in_window(stamp: int, t: int, diameter: int) -> bool:
    """True if a relayed satisfaction stamp is acceptable at iteration ``t``.

    Honest stamps are at most ``diameter`` hops (= iterations) old and never
    from the current or a future iteration, so anything outside
    ``[t - diameter, t - 1]`` is evidence the sender misbehaved.
    """
    return (t - diameter) <= stamp <= (t - 1)


def dispute_evidence(neighbor_v: int, neighbor_u: int, own_u: int) -> bool:
    """True if a neighbor's view of an entry we hold indicates a fault.

    Apply only to entries we have held for two consecutive rounds; by then
    every honest neighbor must hold the entry with the identical stamp, so
    a retraction or a different stamp cannot happen in a clean run.
    """
    return neighbor_v == 0 or neighbor_u != own_u


def _check_inbox(agent_id, inbox, neighbors, t):
    senders = [m.sender for m in inbox]
    if sorted(senders) != sorted(neighbors):
        raise MessageError(
            f"agent {agent_id} at t={t}: inbox senders {sorted(senders)} "
            f"do not match neighbors {sorted(neighbors)}"
        )
    for m in inbox:
        if m.iteration != t - 1:
            raise MessageError(
                f"agent {agent_id} at t={t}: message from {m.sender} stamped "
                f"{m.iteration}, expected {t - 1}"
            )


def step_ft(agent_id: int, state: FtTermState, b_local: bool,
            inbox: list[FtMessage], t: int, diameter: int,
            neighbors: list[int], *,
            correction_doubled: bool = True,
            ) -> tuple[FtTermState, bool, StepEvents]:
    """Run one fault-tolerant protocol iteration for one agent.

    Args:
        agent_id: this agent's id.
        state: state at the end of iteration ``t - 1``.
        b_local: this round's local criterion bit.
        inbox: exactly one message from every neighbor, stamped ``t - 1``.
        t: current iteration (>= 1).
        diameter: graph diameter.
        neighbors: this agent's neighbor ids.
        correction_doubled: use ``2 * diameter`` in the reject-until formula
            (default).  The single-diameter variant is experimental only.

    Returns:
        ``(new_state, stop, events)``.
    """
    _check_inbox(agent_id, inbox, neighbors, t)

    n = state.v_now.shape[0]
    vm1 = state.v_now      # vector at end of t-1
    vm2 = state.v_prev     # vector at end of t-2
    u_prev = state.u
    v = vm1.copy()
    u = u_prev.copy()
    ru = state.reject_until.copy()
    events = StepEvents()
    correction = (2 * diameter if correction_doubled else diameter) + n - 1
    by_sender = {m.sender: m for m in inbox}

    def clear(k: int) -> None:
        prev_stamp = int(u_prev[k])
        v[k] = 0
        u[k] = t
        target = prev_stamp + correction
        clamped = target < t
        if clamped:
            # The disputed stamp was old enough that the refusal window has
            # already passed; record the clamp instead of refusing anything.
            events.clamps += 1
            target = t
        ru[k] = target
        events.cleared.append(ClearEvent(k, prev_stamp, target, clamped))

    # Own entry: record satisfaction, or clear it when the local criterion
    # genuinely dropped so neighbors discard the stale claim too.
    if b_local:
        if vm1[agent_id] == 0 and state.reject_until[agent_id] < t:
            v[agent_id] = 1
            u[agent_id] = t
    elif vm1[agent_id] == 1:
        clear(agent_id)

    # Relayed entries: accept from any neighbor holding the entry with a
    # stamp inside the freshness window, taking the newest such stamp.
    for k in range(n):
        if k == agent_id or vm1[k] != 0 or state.reject_until[k] >= t:
            continue
        best = -1
        for j in neighbors:
            m = by_sender[j]
            if m.v[k] == 1 and stamp_in_window(int(m.u[k]), t, diameter):
                best = max(best, int(m.u[k]))
        if best >= 0:
            v[k] = 1
            u[k] = best

    # Discrepancy clearing: an entry held two consecutive rounds that a
    # neighbor retracts or stamps differently is treated as corrupted.
    if t >= 2:
        for k in range(n):
            if not (vm2[k] == 1 and vm1[k] == 1) or v[k] == 0:
                continue
            for j in neighbors:
                m = by_sender[j]
                if dispute_evidence(int(m.v[k]), int(m.u[k]), int(u_prev[k])):
                    clear(k)
                    break

    scalar = int(u.max())
    stop = bool(v.all()) and t >= scalar + 2 * diameter + n - 1
    new_state = FtTermState(v, vm1, vm2, u, ru, scalar)
    return new_state, stop, events


def detect_faulty_neighbors(agent_id: int, state: FtTermState,
                            inbox_now: list[FtMessage],
                            inbox_prev: list[FtMessage],
                            inbox_prev2: list[FtMessage],
                            t: int) -> list[FaultReport]:
    """Accuse neighbors that kept asserting an entry we cleared.

    Called at the start of iteration ``t`` (so ``inbox_now`` is stamped
    ``t - 1``) with the two remembered older inboxes.  We accuse neighbor
    ``j`` about subject ``k`` when we cleared ``k`` at ``t - 2`` and ``j``
    asserted ``k`` in all three messages stamped ``t-3``, ``t-2``, ``t-1``.
    The two older assertions prove ``j`` held the entry long enough that the
    discrepancy rule applied to it, so an honest ``j`` would have cleared in
    its ``t-1`` state after seeing our zero; still asserting means its
    outbound was corrupted.  One round of patience is the price of never
    accusing an honest agent that had only just accepted the entry.
    """
    if t < 4:
        return []
    now = {m.sender: m for m in inbox_now}
    prev = {m.sender: m for m in inbox_prev}
    prev2 = {m.sender: m for m in inbox_prev2}
    n = state.v_now.shape[0]
    reports = []
    for k in range(n):
        # cleared at t-2: held at end of t-3, gone at end of t-2
        if not (state.v_prev2[k] == 1 and state.v_prev[k] == 0):
            continue
        for j in sorted(now):
            if j in prev and j in prev2 and \
                    prev2[j].v[k] == 1 and prev[j].v[k] == 1 and now[j].v[k] == 1:
                reports.append(FaultReport(agent_id, j, k, t))
    return reports
