"""Basic method: hand-derived traces and closed-form stopping times."""

import numpy as np
import pytest

from termnet.basic import (BasicMessage, BasicTermState, init_basic,
                           outbound_basic, step_basic)
from termnet.criteria import Schedule
from termnet.errors import MessageError
from termnet.graph import CommGraph, make_topology
from termnet.sim import Scenario, run


def msg(sender, v, scalar, t):
    return BasicMessage(sender, np.array(v, dtype=np.uint8), scalar, t)


# ---------------------------------------------------------------------------
# single-step semantics


def test_own_entry_set_records_iteration():
    state = init_basic(2)
    new, stop = step_basic(0, state, True, [msg(1, [0, 0], 0, 4)], 5, 1, [1])
    assert new.v.tolist() == [1, 0]
    assert new.t_scalar == 5
    assert not stop


def test_own_entry_is_never_overwritten_by_neighbors():
    state = BasicTermState(np.array([0, 1], dtype=np.uint8), 0)
    new, _ = step_basic(0, state, False, [msg(1, [1, 1], 3, 4)], 5, 1, [1])
    # neighbor claims our bit is set; only the local criterion may do that
    assert new.v.tolist() == [0, 1]
    assert new.t_scalar == 3


def test_scalar_merge_keeps_own_value_by_default():
    state = BasicTermState(np.array([1, 0], dtype=np.uint8), 7)
    new, _ = step_basic(0, state, True, [msg(1, [0, 0], 2, 9)], 10, 1, [1])
    assert new.t_scalar == 7


def test_neighbor_only_scalar_merge_can_dip():
    state = BasicTermState(np.array([1, 0], dtype=np.uint8), 7)
    new, _ = step_basic(0, state, True, [msg(1, [0, 0], 2, 9)], 10, 1, [1],
                        include_self_in_scalar_merge=False)
    assert new.t_scalar == 2


def test_stop_requires_full_vector_and_aged_scalar():
    full = BasicTermState(np.array([1, 1], dtype=np.uint8), 4)
    _, stop = step_basic(0, full, True, [msg(1, [1, 1], 4, 4)], 5, 1, [1])
    assert stop  # 5 >= 4 + 1
    _, stop = step_basic(0, full, True, [msg(1, [1, 1], 4, 3)], 4, 1, [1])
    assert not stop  # 4 < 4 + 1


def test_inbox_validation():
    state = init_basic(3)
    with pytest.raises(MessageError):
        step_basic(0, state, False, [], 1, 1, [1])
    with pytest.raises(MessageError):
        step_basic(0, state, False, [msg(2, [0, 0, 0], 0, 0)], 1, 1, [1])
    with pytest.raises(MessageError):
        step_basic(0, state, False, [msg(1, [0, 0, 0], 0, 5)], 1, 1, [1])


def test_outbound_snapshot_is_copied():
    state = init_basic(2)
    m = outbound_basic(0, state, 3)
    m.v[0] = 1
    assert state.v[0] == 0


# ---------------------------------------------------------------------------
# two-agent hand trace: times (1, 2), diameter 1 -> both stop at 3

TWO_AGENT_TRACE = {
    # iteration -> (v of agent 0, v of agent 1)
    1: ([1, 0], [0, 0]),
    2: ([1, 0], [1, 1]),
    3: ([1, 1], [1, 1]),
}


def test_two_agent_hand_trace():
    g = CommGraph(2, ((0, 1),))
    rep = run(Scenario(graph=g, criterion=Schedule.from_times((1, 2)),
                       method="basic", max_iterations=10, execution="serial"))
    assert rep.stop_iterations == [3, 3]
    # v_hist row i is the state at the end of iteration i + 1
    for t, (v0, v1) in TWO_AGENT_TRACE.items():
        assert rep.v_hist[t - 1, 0].tolist() == v0, t
        assert rep.v_hist[t - 1, 1].tolist() == v1, t


def test_ring6_frozen_stop():
    g = make_topology("ring", 6)
    rep = run(Scenario(graph=g, criterion=Schedule.from_times((3, 9, 4, 7, 2, 5)),
                       method="basic", max_iterations=50))
    assert rep.common_stop == 12  # last satisfaction 9 + diameter 3
    assert rep.simultaneous


def test_singleton_stops_at_own_satisfaction():
    g = CommGraph(1, ())
    rep = run(Scenario(graph=g, criterion=Schedule.from_times((4,)),
                       method="basic", max_iterations=10))
    assert rep.stop_iterations == [4]  # diameter 0: no propagation wait


# ---------------------------------------------------------------------------
# propagation latency oracle: entry k reaches agent i after exactly dist(i, k)


def test_entry_arrival_matches_distance_oracle():
    rng = np.random.default_rng(8)
    for _ in range(12):
        n = int(rng.integers(2, 14))
        g = make_topology("random", n, edge_prob=0.35,
                          seed=int(rng.integers(0, 2**31)))
        times = tuple(int(x) for x in rng.integers(1, 25, size=n))
        rep = run(Scenario(graph=g, criterion=Schedule.from_times(times),
                           method="basic", max_iterations=80))
        dist = g.distance_matrix()
        # agent i holds entry k exactly from iteration times[k] + dist(i, k)
        arrival = np.array(times)[None, :] + dist
        for row in range(rep.v_hist.shape[0]):
            t = row + 1  # v_hist row i is the end of iteration i + 1
            assert (rep.v_hist[row] == (t >= arrival)).all(), (t, g.edges, times)


def test_exact_simultaneous_stop_on_random_graphs():
    rng = np.random.default_rng(21)
    for _ in range(40):
        n = int(rng.integers(2, 20))
        kind = str(rng.choice(["ring", "path", "star", "complete", "random"]))
        if n < 3 or kind == "random":
            g = make_topology("random", max(n, 3), edge_prob=0.3,
                              seed=int(rng.integers(0, 2**31)))
        else:
            g = make_topology(kind, n)
        n = g.agent_count
        times = tuple(int(x) for x in rng.integers(1, 40, size=n))
        rep = run(Scenario(graph=g, criterion=Schedule.from_times(times),
                           method="basic", max_iterations=120))
        assert rep.simultaneous
        assert rep.common_stop == max(times) + g.diameter()
