"""Backend selection for the whole-round array kernels.

The environment variable ``TERMNET_BACKEND`` picks the implementation:
``numba`` (compiled loops, the default when numba imports cleanly) or
``numpy`` (pure vectorized fallback).  Both expose the same round
functions and produce identical traces; the benchmark script compares
their speed.
"""

from __future__ import annotations

import os
from collections import namedtuple

from ..errors import TermnetError

BACKEND_ENV = "TERMNET_BACKEND"

KernelTopology = namedtuple("KernelTopology", ["adj", "indptr", "indices"])


def topology_arrays(graph) -> KernelTopology:
    """Precomputed adjacency forms the kernels consume."""
    indptr, indices = graph.csr()
    return KernelTopology(graph.adjacency_matrix(), indptr, indices)


def _numba_usable() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def _select_backend() -> str:
    requested = os.environ.get(BACKEND_ENV, "").strip().lower()
    if requested not in ("", "numba", "numpy"):
        raise TermnetError(
            f"{BACKEND_ENV}={requested!r} not recognized; use 'numba' or 'numpy'"
        )
    if requested == "numpy":
        return "numpy"
    if requested == "numba":
        if not _numba_usable():
            raise TermnetError(
                f"{BACKEND_ENV}=numba requested but numba is not importable"
            )
        return "numba"
    return "numba" if _numba_usable() else "numpy"


ACTIVE_BACKEND = _select_backend()

if ACTIVE_BACKEND == "numba":
    from . import rounds_numba as _impl

    def basic_round(v1, t1, v_msg, t_msg, topo, b, t, diameter, include_self):
        return _impl.basic_round(v1, t1, v_msg, t_msg, topo.indptr,
                                 topo.indices, b, t, diameter, include_self)

    def ft_round(v1, v2, u1, ru1, v_msg, u_msg, topo, b, t, diameter,
                 correction_doubled):
        return _impl.ft_round(v1, v2, u1, ru1, v_msg, u_msg, topo.indptr,
                              topo.indices, b, t, diameter, correction_doubled)
else:
    from . import rounds_numpy as _impl

    def basic_round(v1, t1, v_msg, t_msg, topo, b, t, diameter, include_self):
        return _impl.basic_round(v1, t1, v_msg, t_msg, topo.adj, b, t,
                                 diameter, include_self)

    def ft_round(v1, v2, u1, ru1, v_msg, u_msg, topo, b, t, diameter,
                 correction_doubled):
        return _impl.ft_round(v1, v2, u1, ru1, v_msg, u_msg, topo.adj, b, t,
                              diameter, correction_doubled)


def get_round_functions(backend: str):
    """Round functions for an explicit backend (used by the benchmark and
    the cross-backend tests), independent of the env selection."""
    if backend == "numba":
        from . import rounds_numba as impl

        def basic(v1, t1, v_msg, t_msg, topo, b, t, diameter, include_self):
            return impl.basic_round(v1, t1, v_msg, t_msg, topo.indptr,
                                    topo.indices, b, t, diameter, include_self)

        def ft(v1, v2, u1, ru1, v_msg, u_msg, topo, b, t, diameter,
               correction_doubled):
            return impl.ft_round(v1, v2, u1, ru1, v_msg, u_msg, topo.indptr,
                                 topo.indices, b, t, diameter,
                                 correction_doubled)

        return basic, ft
    if backend == "numpy":
        from . import rounds_numpy as impl

        def basic(v1, t1, v_msg, t_msg, topo, b, t, diameter, include_self):
            return impl.basic_round(v1, t1, v_msg, t_msg, topo.adj, b, t,
                                    diameter, include_self)

        def ft(v1, v2, u1, ru1, v_msg, u_msg, topo, b, t, diameter,
               correction_doubled):
            return impl.ft_round(v1, v2, u1, ru1, v_msg, u_msg, topo.adj, b,
                                 t, diameter, correction_doubled)

        return basic, ft
    raise TermnetError(f"unknown backend {backend!r}")
