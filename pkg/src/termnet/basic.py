"""Basic distributed termination detection.

Each agent keeps a status vector ``v`` with one bit per agent and an
iteration scalar ``t_scalar``.  Every round it merges the vectors its
neighbors sent last round, records its own local criterion when that first
turns true, and stops once the vector is full and ``t_scalar`` lies at least
one graph diameter in the past.  Under a connected graph and monotone local
criteria, every agent stops in the same round: the first round after all
agents are satisfied plus the diameter.

The step function is pure: it never mutates its inputs, so per-round agent
steps can run serially, in a thread pool, or through the array kernels and
produce identical traces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MessageError


@dataclass(frozen=True)
class BasicTermState:
    """Protocol state of one agent after completing an iteration."""

    v: np.ndarray          # uint8, one bit per agent
    t_scalar: int          # latest known local-satisfaction iteration

    def copy(self) -> "BasicTermState":
        return BasicTermState(self.v.copy(), self.t_scalar)


@dataclass(frozen=True)
class BasicMessage:
    """Snapshot of a sender's state at the end of ``iteration``."""

    sender: int
    v: np.ndarray
    t_scalar: int
    iteration: int


def init_basic(agent_count: int) -> BasicTermState:
    """Zeroed state: nothing known, scalar at 0."""
    return BasicTermState(np.zeros(agent_count, dtype=np.uint8), 0)


def outbound_basic(agent_id: int, state: BasicTermState, t: int) -> BasicMessage:
    """Message the agent sends at the end of iteration ``t``."""
    return BasicMessage(agent_id, state.v.copy(), state.t_scalar, t)


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


def step_basic(agent_id: int, state: BasicTermState, b_local: bool,
               inbox: list[BasicMessage], t: int, diameter: int,
               neighbors: list[int], *,
               include_self_in_scalar_merge: bool = True,
               ) -> tuple[BasicTermState, bool]:
    """Run one protocol iteration for one agent.

    Args:
        agent_id: this agent's id.
        state: state at the end of iteration ``t - 1``.
        b_local: this round's local criterion bit.
        inbox: exactly one message from every neighbor, stamped ``t - 1``.
        t: current iteration (>= 1).
        diameter: graph diameter, known to all agents.
        neighbors: this agent's neighbor ids.
        include_self_in_scalar_merge: keep the agent's own previous scalar in
            the merge (default).  The neighbor-only variant can make the
            scalar dip for one round at the last-satisfying agent, which
            breaks exact simultaneous stopping; it is kept only as an
            experimental mode.

    Returns:
        ``(new_state, stop)`` where ``stop`` means the agent may terminate
        at the end of this iteration.
    """
    _check_inbox(agent_id, inbox, neighbors, t)

    v = state.v.copy()
    # Merge neighbor vectors for every entry except our own, which only our
    # local criterion may set.  The supplying neighbor keeps re-sending a 1,
    # so taking the neighbor max alone never loses an entry in fault-free
    # runs.
    if inbox:
        stacked = np.stack([m.v for m in inbox])
        merged = stacked.max(axis=0)
        own = v[agent_id]
        v = merged
        v[agent_id] = own
        scalar = max(m.t_scalar for m in inbox)
    else:
        scalar = 0
    if include_self_in_scalar_merge:
        scalar = max(scalar, state.t_scalar)

    # Record our own satisfaction the first time the local bit turns true.
    if b_local and state.v[agent_id] == 0:
        v[agent_id] = 1
        scalar = t

    stop = bool(v.all()) and t >= scalar + diameter
    return BasicTermState(v, scalar), stop
