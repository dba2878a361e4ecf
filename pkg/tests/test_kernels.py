import os
import subprocess
import sys

import numpy as np
import pytest
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from anosov import kernels
from anosov.floyd import FloydFunction, FloydGraph
from anosov.kernels import all_pairs_dijkstra, common_prefix_lengths, csr_graph
from anosov.words import FreeGroup, ball

compiled = pytest.mark.skipif(kernels.BACKEND != "compiled", reason="compiled kernels not built")


def random_graph(rng, n=60, m=240):
    rows = rng.integers(0, n, m)
    cols = rng.integers(0, n, m)
    keep = rows != cols
    rows, cols = rows[keep], cols[keep]
    w = rng.uniform(0.01, 2.0, rows.size)
    return csr_graph(n, np.concatenate([rows, cols]), np.concatenate([cols, rows]), np.concatenate([w, w]))


def scipy_reference(indptr, indices, weights):
    n = indptr.size - 1
    # scipy keeps the smallest of duplicate edges only after summing them, so
    # collapse duplicates by their minimum first
    dense = np.full((n, n), np.inf)
    for i in range(n):
        for k in range(indptr[i], indptr[i + 1]):
            dense[i, indices[k]] = min(dense[i, indices[k]], weights[k])
    r, c = np.nonzero(np.isfinite(dense))
    return dijkstra(csr_matrix((dense[r, c], (r, c)), shape=(n, n)), directed=True)


@pytest.mark.parametrize("backend", [None, "python"])
def test_dijkstra_matches_scipy(backend, rng):
    for _ in range(5):
        g = random_graph(rng)
        assert np.allclose(all_pairs_dijkstra(*g, backend=backend), scipy_reference(*g), rtol=1e-13, atol=0)


def test_dijkstra_sources_and_unreachable():
    g = csr_graph(4, [0, 1], [1, 0], [0.5, 0.5])
    D = all_pairs_dijkstra(*g, sources=[1, 3])
    assert D.shape == (2, 4)
    assert D[0, 0] == 0.5 and np.isinf(D[0, 2]) and D[1, 3] == 0.0
    with pytest.raises(ValueError):
        all_pairs_dijkstra(*csr_graph(2, [0], [1], [-1.0]))


@compiled
def test_backends_agree_on_floyd_graph():
    G = FloydGraph(FreeGroup(2), FloydFunction.exponential(2.0), 5)
    a = all_pairs_dijkstra(*G.csr, backend="compiled")
    b = all_pairs_dijkstra(*G.csr, backend="python")
    assert np.array_equal(a, b)


def test_dijkstra_thread_independent(rng):
    g = random_graph(rng, n=120, m=600)
    ref = all_pairs_dijkstra(*g, threads=1)
    for t in (2, 3, 8):
        assert np.array_equal(all_pairs_dijkstra(*g, threads=t), ref)


@pytest.mark.parametrize("backend", [None, "python"])
def test_common_prefix_lengths(backend, rng):
    B = ball(FreeGroup(2), 5)
    i = rng.integers(0, len(B), 2000)
    j = rng.integers(0, len(B), 2000)
    got = common_prefix_lengths(B.prefix_table, i, j, backend=backend)
    for a, b, m in zip(i, j, got):
        u, v = B[a], B[b]
        k = 0
        while k < min(len(u), len(v)) and u[k] == v[k]:
            k += 1
        assert m == k


def test_pure_python_switch():
    env = dict(os.environ, ANOSOV_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import anosov.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_compiled_unavailable_raises(monkeypatch):
    monkeypatch.setattr(kernels, "BACKEND", "python")
    with pytest.raises(RuntimeError):
        all_pairs_dijkstra(*csr_graph(2, [0], [1], [1.0]), backend="compiled")
