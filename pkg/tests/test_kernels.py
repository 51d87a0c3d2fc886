"""Array-kernel backends must agree bit for bit.

The compiled and pure-numpy round functions are run over randomized
protocol states — including refusal windows, disputes, and mid-round
satisfaction — and compared elementwise.  A subprocess run pins the
environment selection logic.
"""

import os
import subprocess
import sys

import numpy as np
import pytest

from termnet import _kernels
from termnet._kernels import get_round_functions, topology_arrays
from termnet.errors import TermnetError
from termnet.graph import make_topology


def random_topology(rng):
    n = int(rng.integers(2, 16))
    g = make_topology("random", max(n, 3), edge_prob=0.35,
                      seed=int(rng.integers(0, 2**31)))
    return g, topology_arrays(g)


def random_ft_state(rng, n, t):
    v1 = (rng.random(n * n) < 0.5).astype(np.uint8).reshape(n, n)
    v2 = np.where(rng.random((n, n)) < 0.8, v1, 1 - v1).astype(np.uint8)
    u1 = rng.integers(0, t + 2, size=(n, n)).astype(np.int64)
    ru1 = rng.integers(0, t + 4, size=(n, n)).astype(np.int64)
    v_msg = (rng.random(n * n) < 0.5).astype(np.uint8).reshape(n, n)
    u_msg = rng.integers(0, t + 2, size=(n, n)).astype(np.int64)
    b = (rng.random(n) < 0.6).astype(np.uint8)
    return v1, v2, u1, ru1, v_msg, u_msg, b


@pytest.mark.parametrize("method", ["basic", "ft"])
def test_backends_agree_on_random_rounds(method):
    if not _kernels._numba_usable():
        pytest.skip("numba not importable")
    basic_np, ft_np = get_round_functions("numpy")
    basic_nb, ft_nb = get_round_functions("numba")
    rng = np.random.default_rng(hash(method) % (2**32))
    for trial in range(120):
        g, topo = random_topology(rng)
        n, d = g.agent_count, g.diameter()
        t = int(rng.integers(1, 40))
        if method == "basic":
            v1 = (rng.random(n * n) < 0.5).astype(np.uint8).reshape(n, n)
            t1 = rng.integers(0, t + 1, size=n).astype(np.int64)
            v_msg = (rng.random(n * n) < 0.5).astype(np.uint8).reshape(n, n)
            t_msg = rng.integers(0, t + 1, size=n).astype(np.int64)
            b = (rng.random(n) < 0.6).astype(np.uint8)
            include = bool(rng.integers(0, 2))
            out_a = basic_np(v1, t1, v_msg, t_msg, topo, b, t, d, include)
            out_b = basic_nb(v1, t1, v_msg, t_msg, topo, b, t, d, include)
        else:
            v1, v2, u1, ru1, v_msg, u_msg, b = random_ft_state(rng, n, t)
            doubled = bool(rng.integers(0, 2))
            out_a = ft_np(v1, v2, u1, ru1, v_msg, u_msg, topo, b, t, d, doubled)
            out_b = ft_nb(v1, v2, u1, ru1, v_msg, u_msg, topo, b, t, d, doubled)
        for idx, (a, bb) in enumerate(zip(out_a, out_b)):
            a, bb = np.asarray(a), np.asarray(bb)
            assert a.shape == bb.shape, (trial, idx)
            assert (a == bb).all(), (trial, idx, g.edges, t)


def test_active_backend_is_valid():
    assert _kernels.ACTIVE_BACKEND in ("numba", "numpy")


def test_get_round_functions_rejects_unknown():
    with pytest.raises(TermnetError):
        get_round_functions("fortran")


def test_numpy_env_override_runs_identically():
    """A forced-numpy subprocess must reproduce the in-process result."""
    code = (
        "from termnet.graph import make_topology\n"
        "from termnet.criteria import Schedule\n"
        "from termnet.faults import FaultScript\n"
        "from termnet.sim import Scenario, run\n"
        "import termnet._kernels as k\n"
        "g = make_topology('ring', 8)\n"
        "sc = Scenario(graph=g, criterion=Schedule.from_times((3,4,6,5,4,2,30,8)),\n"
        "              method='fault_tolerant',\n"
        "              faults=(FaultScript(agent=4, windows=((20,26),),\n"
        "                                  subjects=(5,), stamp_mode='fresh'),),\n"
        "              max_iterations=200)\n"
        "r = run(sc)\n"
        "print(k.ACTIVE_BACKEND, r.common_stop, r.clamp_count,\n"
        "      int(r.v_hist.astype('int64').sum()))\n"
    )
    env = dict(os.environ, TERMNET_BACKEND="numpy")
    out = subprocess.run([sys.executable, "-c", code], env=env,
                         capture_output=True, text=True, check=True)
    backend, stop, clamps, vsum = out.stdout.split()
    assert backend == "numpy"
    assert (int(stop), int(clamps)) == (53, 8)

    env_default = {k_: v for k_, v in os.environ.items() if k_ != "TERMNET_BACKEND"}
    out2 = subprocess.run([sys.executable, "-c", code], env=env_default,
                          capture_output=True, text=True, check=True)
    _, stop2, clamps2, vsum2 = out2.stdout.split()
    assert (stop2, clamps2, vsum2) == (stop, clamps, vsum)


def test_unknown_env_value_errors():
    env = dict(os.environ, TERMNET_BACKEND="cuda")
    out = subprocess.run(
        [sys.executable, "-c", "import termnet._kernels"],
        env=env, capture_output=True, text=True)
    assert out.returncode != 0
    assert "TERMNET_BACKEND" in out.stderr
