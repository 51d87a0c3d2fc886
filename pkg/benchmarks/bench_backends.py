"""Compare the compiled and pure-numpy round kernels.

Runs both protocol round functions over synthetic states of increasing
size and prints per-round timings plus the speedup of the compiled
backend.  The compiled functions are warmed up first so the jit cost does
not pollute the numbers.

    python3 benchmarks/bench_backends.py
    python3 benchmarks/bench_backends.py --sizes 50 200 800 --rounds 200
"""

import argparse
import time

import numpy as np

from termnet._kernels import get_round_functions, topology_arrays
from termnet.graph import make_topology


def synth_states(rng, n, t):
    v1 = (rng.random((n, n)) < 0.5).astype(np.uint8)
    v2 = np.where(rng.random((n, n)) < 0.8, v1, 1 - v1).astype(np.uint8)
    t1 = rng.integers(0, t + 1, size=n).astype(np.int64)
    u1 = rng.integers(0, t + 2, size=(n, n)).astype(np.int64)
    ru1 = rng.integers(0, t + 4, size=(n, n)).astype(np.int64)
    v_msg = (rng.random((n, n)) < 0.5).astype(np.uint8)
    t_msg = rng.integers(0, t + 1, size=n).astype(np.int64)
    u_msg = rng.integers(0, t + 2, size=(n, n)).astype(np.int64)
    b = (rng.random(n) < 0.6).astype(np.uint8)
    return v1, v2, t1, u1, ru1, v_msg, t_msg, u_msg, b


def time_backend(backend, n, rounds, seed):
    basic, ft = get_round_functions(backend)
    rng = np.random.default_rng(seed)
    g = make_topology("random", n, edge_prob=min(0.3, 8.0 / n), seed=seed)
    topo = topology_arrays(g)
    d = g.diameter()
    t = 10
    v1, v2, t1, u1, ru1, v_msg, t_msg, u_msg, b = synth_states(rng, n, t)

    # warm up (compiles on the first call for the jit backend)
    basic(v1, t1, v_msg, t_msg, topo, b, t, d, True)
    ft(v1, v2, u1, ru1, v_msg, u_msg, topo, b, t, d, True)

    start = time.perf_counter()
    for _ in range(rounds):
        basic(v1, t1, v_msg, t_msg, topo, b, t, d, True)
    basic_s = (time.perf_counter() - start) / rounds

    start = time.perf_counter()
    for _ in range(rounds):
        ft(v1, v2, u1, ru1, v_msg, u_msg, topo, b, t, d, True)
    ft_s = (time.perf_counter() - start) / rounds
    return basic_s, ft_s


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+",
                        default=[25, 100, 400])
    parser.add_argument("--rounds", type=int, default=300,
                        help="timed round calls per measurement")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    print(f"{'agents':>7s} {'kernel':>7s} {'numpy':>12s} {'numba':>12s} "
          f"{'speedup':>8s}")
    for n in args.sizes:
        np_basic, np_ft = time_backend("numpy", n, args.rounds, args.seed)
        nb_basic, nb_ft = time_backend("numba", n, args.rounds, args.seed)
        for kernel, a, bb in (("basic", np_basic, nb_basic),
                              ("ft", np_ft, nb_ft)):
            print(f"{n:>7d} {kernel:>7s} {a * 1e6:>10.1f}us "
                  f"{bb * 1e6:>10.1f}us {a / bb:>7.1f}x")


if __name__ == "__main__":
    main()
