"""Vectorized whole-round kernels (pure numpy fallback backend).

Each function advances every agent one synchronous iteration at once,
operating on stacked state matrices (row ``i`` = agent ``i``) and message
matrices (row ``j`` = the message agent ``j`` sent at the end of the
previous iteration, possibly corrupted by a fault script).  Semantics match
the per-agent step functions bit for bit; the differential tests hold all
three execution routes to identical traces.
"""

from __future__ import annotations

import numpy as np


def basic_round(v1, t1, v_msg, t_msg, adj, b, t, diameter, include_self):
    """One basic-protocol round for all agents.

    Args:
        v1: (n, n) uint8, agent vectors at the end of iteration ``t - 1``.
        t1: (n,) int64, agent scalars at the end of ``t - 1``.
        v_msg: (n, n) uint8, sent vectors (row = sender).
        t_msg: (n,) int64, sent scalars.
        adj: (n, n) bool adjacency.
        b: (n,) uint8 local criterion bits for iteration ``t``.
        t: current iteration.
        diameter: graph diameter.
        include_self: keep each agent's own previous scalar in the merge.

    Returns:
        ``(v, t_scalar, stop)``.
    """
    n = v1.shape[0]
    diag = np.arange(n)
    reach = adj.astype(np.int64) @ (v_msg != 0).astype(np.int64)
    v = (reach > 0).astype(np.uint8)
    v[diag, diag] = v1[diag, diag]

    t_mat = np.broadcast_to(t_msg, (n, n))
    scalar = np.max(t_mat, axis=1, where=adj, initial=0)
    if include_self:
        scalar = np.maximum(scalar, t1)

    newly = (b != 0) & (v1[diag, diag] == 0)
    v[diag[newly], diag[newly]] = 1
    scalar = np.where(newly, t, scalar).astype(np.int64)

    stop = v.all(axis=1) & (t >= scalar + diameter)
    return v, scalar, stop


def ft_round(v1, v2, u1, ru1, v_msg, u_msg, adj, b, t, diameter,
             correction_doubled):
    """One fault-tolerant round for all agents.

    Args:
        v1, v2: (n, n) uint8 vectors at the end of ``t - 1`` and ``t - 2``.
        u1: (n, n) int64 per-entry satisfaction stamps.
        ru1: (n, n) int64 reject-until iterations.
        v_msg, u_msg: sent vector / stamp matrices (row = sender).
        adj: (n, n) bool adjacency.
        b: (n,) uint8 local criterion bits for iteration ``t``.
        t, diameter: current iteration and graph diameter.
        correction_doubled: use ``2 * diameter`` in the reject-until formula.

    Returns:
        ``(v, u, ru, scalar, stop, cleared, clamps)`` where ``cleared`` is
        the (n, n) mask of entries cleared this round and ``clamps`` counts
        reject-until targets clamped to ``t``.
    """
    n = v1.shape[0]
    diag = np.arange(n)
    correction = (2 * diameter if correction_doubled else diameter) + n - 1
    blocked = ru1 >= t
    adj3 = adj[:, :, None]

    v = v1.copy()
    u = u1.copy()
    ru = ru1.copy()

    # Relayed accepts: newest in-window stamp offered by any neighbor.
    eligible = (v_msg != 0) & (u_msg >= t - diameter) & (u_msg <= t - 1)
    offered = np.where(adj3 & eligible[None, :, :], u_msg[None, :, :], -1)
    best = offered.max(axis=1)
    accept = (v1 == 0) & ~blocked & (best >= 0)
    accept[diag, diag] = False
    v[accept] = 1
    u[accept] = best[accept]

    # Own entries: record satisfaction, or mark a genuine drop for clearing.
    own_prev = v1[diag, diag]
    set_own = (b != 0) & (own_prev == 0) & ~blocked[diag, diag]
    v[diag[set_own], diag[set_own]] = 1
    u[diag[set_own], diag[set_own]] = t

    cleared = np.zeros((n, n), dtype=bool)
    drop = (b == 0) & (own_prev != 0)
    cleared[diag[drop], diag[drop]] = True

    # Discrepancy clearing on entries held two consecutive rounds.
    if t >= 2:
        held2 = (v2 != 0) & (v1 != 0)
        evidence = (v_msg[None, :, :] == 0) | (u_msg[None, :, :] != u1[:, None, :])
        disputed = (adj3 & evidence).any(axis=1)
        cleared |= held2 & disputed & (v != 0)

    prev_stamp = u1[cleared]
    target = prev_stamp + correction
    clamps = int((target < t).sum())
    v[cleared] = 0
    u[cleared] = t
    ru[cleared] = np.maximum(target, t)

    scalar = u.max(axis=1) if n else np.zeros(0, dtype=np.int64)
    stop = (v != 0).all(axis=1) & (t >= scalar + 2 * diameter + n - 1)
    return v, u, ru, scalar, stop, cleared, clamps
