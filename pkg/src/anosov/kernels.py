"""Kernel selection: the compiled extension when available, else pure Python.

Set ``ANOSOV_PURE_PYTHON=1`` to force the fallback.
"""

from concurrent.futures import ThreadPoolExecutor
import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py
if os.environ.get("ANOSOV_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = _kernels_py

__all__ = ["BACKEND", "all_pairs_dijkstra", "common_prefix_lengths", "csr_graph"]


def csr_graph(n, rows, cols, weights):
    """CSR arrays ``(indptr, indices, weights)`` sorted by (row, col)."""
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    weights = np.asarray(weights, dtype=np.float64)
    order = np.lexsort((cols, rows))
    rows, cols, weights = rows[order], cols[order], weights[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, rows + 1, 1)
    return np.cumsum(indptr), np.ascontiguousarray(cols), np.ascontiguousarray(weights)


def all_pairs_dijkstra(indptr, indices, weights, sources=None, threads=1, backend=None):
    """Shortest-path distances from each source to every vertex.

    Returns an array of shape ``(len(sources), n)``.  Sources are split
    into contiguous chunks across ``threads`` workers; each row is
    computed independently, so the result does not depend on ``threads``.
    """
    impl = {"python": _kernels_py, None: _impl}.get(backend, _impl)
    if backend == "compiled" and BACKEND != "compiled":
        raise RuntimeError("compiled kernels are not available")
    indptr = np.ascontiguousarray(indptr, dtype=np.int64)
    indices = np.ascontiguousarray(indices, dtype=np.int64)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    if np.any(weights < 0):
        raise ValueError("edge weights must be nonnegative")
    n = indptr.shape[0] - 1
    if sources is None:
        sources = np.arange(n, dtype=np.int64)
    sources = np.ascontiguousarray(sources, dtype=np.int64)
    out = np.empty((sources.shape[0], n), dtype=np.float64)
    threads = max(1, int(threads))
    if threads == 1 or sources.shape[0] < 2 * threads:
        impl.dijkstra_rows(indptr, indices, weights, sources, out)
        return out
    bounds = np.linspace(0, sources.shape[0], threads + 1).astype(np.int64)

    def work(k):
        lo, hi = bounds[k], bounds[k + 1]
        if hi > lo:
            block = np.empty((hi - lo, n), dtype=np.float64)
            impl.dijkstra_rows(indptr, indices, weights, sources[lo:hi], block)
            out[lo:hi] = block

    with ThreadPoolExecutor(max_workers=threads) as ex:
        list(ex.map(work, range(threads)))
    return out


def common_prefix_lengths(prefix_table, i, j, backend=None):
    impl = {"python": _kernels_py, None: _impl}.get(backend, _impl)
    return impl.common_prefix_lengths(np.ascontiguousarray(prefix_table, dtype=np.int64), i, j)
