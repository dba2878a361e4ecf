"""Pure-Python versions of the compiled kernels.

Same signatures and results as the extension module; used when it is not
built or when ``ANOSOV_PURE_PYTHON=1`` is set.
"""

import heapq

import numpy as np


def dijkstra_rows(indptr, indices, weights, sources, out):
    """Fill ``out[r]`` with shortest-path distances from ``sources[r]``."""
    n = indptr.shape[0] - 1
    ip = indptr.tolist()
    ix = indices.tolist()
    wt = weights.tolist()
    for r, s in enumerate(sources.tolist()):
        dist = [float("inf")] * n
        dist[s] = 0.0
        heap = [(0.0, s)]
        while heap:
            du, u = heapq.heappop(heap)
            if du > dist[u]:
                continue
            for e in range(ip[u], ip[u + 1]):
                v = ix[e]
                nd = du + wt[e]
                if nd < dist[v]:
                    dist[v] = nd
                    heapq.heappush(heap, (nd, v))
        out[r, :] = dist


def common_prefix_lengths(prefix_table, i, j):
    """Length of the longest common prefix of words ``i[k]`` and ``j[k]``.

    ``prefix_table[w, m]`` is the index of the length-``m`` prefix of word
    ``w`` (or -1 past its end); equal prefixes have equal indices.
    """
    i = np.asarray(i, dtype=np.int64)
    j = np.asarray(j, dtype=np.int64)
    out = np.zeros(i.shape[0], dtype=np.int64)
    width = prefix_table.shape[1]
    for k in range(i.shape[0]):
        a, b = prefix_table[i[k]], prefix_table[j[k]]
        m = 0
        while m + 1 < width and a[m + 1] >= 0 and a[m + 1] == b[m + 1]:
            m += 1
        out[k] = m
    return out
