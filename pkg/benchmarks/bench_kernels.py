"""Compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--radius 5] [--sources 200] [--threads 1]

Times all-sources Dijkstra on a Floyd-weighted Cayley ball of F_2 and
common-prefix lengths for all pairs of the ball, checks that both
backends agree and prints the speedup.
"""

import argparse
import time

import numpy as np

from anosov import kernels
from anosov.floyd import FloydFunction, FloydGraph
from anosov.words import FreeGroup, ball


def _time(fn, repeat=3):
    best = np.inf
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--radius", type=int, default=5)
    ap.add_argument("--sources", type=int, default=200)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args(argv)

    if kernels.BACKEND != "compiled":
        print("compiled kernels unavailable; only the fallback is timed")
    model = FreeGroup(2)
    G = FloydGraph(model, FloydFunction.exponential(2.0), args.radius)
    n = len(G.ball)
    src = np.arange(min(args.sources, n))
    print(f"ball radius {args.radius}: {n} vertices, {G.csr[1].size} directed edges")

    results = {}
    for backend in ("python", "compiled"):
        if backend == "compiled" and kernels.BACKEND != "compiled":
            continue
        t, D = _time(lambda: kernels.all_pairs_dijkstra(*G.csr, sources=src, threads=args.threads,
                                                        backend=backend), repeat=1 if backend == "python" else 3)
        results[("dijkstra", backend)] = (t, D)
        print(f"dijkstra  {backend:9s} {len(src):5d} sources  {t * 1e3:9.2f} ms")

    B = ball(model, args.radius)
    i, j = np.triu_indices(len(B))
    for backend in ("python", "compiled"):
        if backend == "compiled" and kernels.BACKEND != "compiled":
            continue
        t, P = _time(lambda: kernels.common_prefix_lengths(B.prefix_table, i, j, backend=backend))
        results[("prefix", backend)] = (t, P)
        print(f"prefix    {backend:9s} {i.size:9d} pairs  {t * 1e3:9.2f} ms")

    for name in ("dijkstra", "prefix"):
        if (name, "compiled") in results:
            tp, a = results[(name, "python")]
            tc, b = results[(name, "compiled")]
            assert np.array_equal(a, b), f"{name}: backends disagree"
            print(f"{name:9s} speedup {tp / tc:7.1f}x (results identical)")


if __name__ == "__main__":
    main()
