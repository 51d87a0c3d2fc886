"""Compiled whole-round kernels (numba backend).

Loop implementations of the same round semantics as ``rounds_numpy``,
compiled with ``@njit``.  Adjacency arrives in CSR form (``indptr`` /
``indices``) so the hot loops stay allocation free.  Outputs must match the
numpy kernels and the per-agent step functions exactly; the differential
tests enforce that.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def basic_round(v1, t1, v_msg, t_msg, indptr, indices, b, t, diameter,
                include_self):
    n = v1.shape[0]
    v = np.zeros((n, n), dtype=np.uint8)
    scalar = np.zeros(n, dtype=np.int64)
    stop = np.zeros(n, dtype=np.bool_)
    for i in range(n):
        best_t = np.int64(0)
        for p in range(indptr[i], indptr[i + 1]):
            j = indices[p]
            if t_msg[j] > best_t:
                best_t = t_msg[j]
            for k in range(n):
                if v_msg[j, k] != 0:
                    v[i, k] = 1
        v[i, i] = v1[i, i]
        if include_self and t1[i] > best_t:
            best_t = t1[i]
        if b[i] != 0 and v1[i, i] == 0:
            v[i, i] = 1
            best_t = np.int64(t)
        scalar[i] = best_t
        full = True
        for k in range(n):
            if v[i, k] == 0:
                full = False
                break
        stop[i] = full and t >= best_t + diameter
    return v, scalar, stop


@njit(cache=True)
def ft_round(v1, v2, u1, ru1, v_msg, u_msg, indptr, indices, b, t, diameter,
             correction_doubled):
    n = v1.shape[0]
    if correction_doubled:
        correction = 2 * diameter + n - 1
    else:
        correction = diameter + n - 1
    v = v1.copy()
    u = u1.copy()
    ru = ru1.copy()
    scalar = np.zeros(n, dtype=np.int64)
    stop = np.zeros(n, dtype=np.bool_)
    cleared = np.zeros((n, n), dtype=np.bool_)
    clamps = 0
    threshold = 2 * diameter + n - 1
    for i in range(n):
        # Relayed accepts: newest in-window stamp from any neighbor.
        for k in range(n):
            if k == i or v1[i, k] != 0 or ru1[i, k] >= t:
                continue
            best = np.int64(-1)
            for p in range(indptr[i], indptr[i + 1]):
                j = indices[p]
                if v_msg[j, k] != 0:
                    s = u_msg[j, k]
                    if s >= t - diameter and s <= t - 1 and s > best:
                        best = s
            if best >= 0:
                v[i, k] = 1
                u[i, k] = best

        # Own entry: record satisfaction, or clear on a genuine drop.
        if b[i] != 0:
            if v1[i, i] == 0 and ru1[i, i] < t:
                v[i, i] = 1
                u[i, i] = np.int64(t)
        elif v1[i, i] != 0:
            prev_stamp = u1[i, i]
            v[i, i] = 0
            u[i, i] = np.int64(t)
            target = prev_stamp + correction
            if target < t:
                clamps += 1
                target = np.int64(t)
            ru[i, i] = target
            cleared[i, i] = True

        # Discrepancy clearing on entries held two consecutive rounds.
        if t >= 2:
            for k in range(n):
                if v2[i, k] == 0 or v1[i, k] == 0 or v[i, k] == 0:
                    continue
                hit = False
                for p in range(indptr[i], indptr[i + 1]):
                    j = indices[p]
                    if v_msg[j, k] == 0 or u_msg[j, k] != u1[i, k]:
                        hit = True
                        break
                if hit:
                    prev_stamp = u1[i, k]
                    v[i, k] = 0
                    u[i, k] = np.int64(t)
                    target = prev_stamp + correction
                    if target < t:
                        clamps += 1
                        target = np.int64(t)
                    ru[i, k] = target
                    cleared[i, k] = True

        best_u = np.int64(0)
        full = True
        for k in range(n):
            if u[i, k] > best_u:
                best_u = u[i, k]
            if v[i, k] == 0:
                full = False
        scalar[i] = best_u
        stop[i] = full and t >= best_u + threshold
    return v, u, ru, scalar, stop, cleared, clamps
