"""Multi-source Dijkstra kernels over integer-weighted CSR adjacency.

The hot precompute loop has two interchangeable implementations: a numba
``@njit`` kernel (parallel over sources) and a pure Python/numpy fallback.
Selection: the fallback is used when numba is unavailable or when the
environment variable ``DETMWPM_DISABLE_NUMBA`` is set to a non-empty value.
Both produce identical distance matrices; ``detmwpm bench`` compares their
throughput.
"""
from __future__ import annotations

import heapq
import os

import numpy as np

DISABLE_ENV = "DETMWPM_DISABLE_NUMBA"
INF = np.int64(2**62)

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None


def numba_enabled() -> bool:
    return numba is not None and not os.environ.get(DISABLE_ENV)


def build_csr(
    num_vertices: int, edges
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Symmetric CSR (indptr, neighbor, weight) from undirected edges."""
    deg = np.zeros(num_vertices + 1, dtype=np.int64)
    for e in edges:
        deg[e.u + 1] += 1
        deg[e.v + 1] += 1
    indptr = np.cumsum(deg)
    nbr = np.zeros(indptr[-1], dtype=np.int64)
    wt = np.zeros(indptr[-1], dtype=np.int64)
    fill = indptr[:-1].copy()
    for e in edges:
        nbr[fill[e.u]] = e.v
        wt[fill[e.u]] = e.weight
        fill[e.u] += 1
        nbr[fill[e.v]] = e.u
        wt[fill[e.v]] = e.weight
        fill[e.v] += 1
    return indptr, nbr, wt


if numba is not None:

    @numba.njit(parallel=True, cache=True)
    def _dijkstra_numba(indptr, nbr, wt, sources, out):  # pragma: no cover
        nv = indptr.shape[0] - 1
        cap = nbr.shape[0] + 1
        for si in numba.prange(sources.shape[0]):
            dist = out[si]
            for i in range(nv):
                dist[i] = INF
            heap_d = np.empty(cap, dtype=np.int64)
            heap_v = np.empty(cap, dtype=np.int64)
            dist[sources[si]] = 0
            heap_d[0] = 0
            heap_v[0] = sources[si]
            n = 1
            while n > 0:
                d = heap_d[0]
                v = heap_v[0]
                n -= 1
                heap_d[0] = heap_d[n]
                heap_v[0] = heap_v[n]
                i = 0
                while True:  # sift down
                    left = 2 * i + 1
                    if left >= n:
                        break
                    small = left
                    right = left + 1
                    if right < n and heap_d[right] < heap_d[left]:
                        small = right
                    if heap_d[small] >= heap_d[i]:
                        break
                    heap_d[i], heap_d[small] = heap_d[small], heap_d[i]
                    heap_v[i], heap_v[small] = heap_v[small], heap_v[i]
                    i = small
                if d > dist[v]:
                    continue
                for k in range(indptr[v], indptr[v + 1]):
                    u = nbr[k]
                    nd = d + wt[k]
                    if nd < dist[u]:
                        dist[u] = nd
                        j = n
                        heap_d[n] = nd
                        heap_v[n] = u
                        n += 1
                        while j > 0:  # sift up
                            parent = (j - 1) // 2
                            if heap_d[parent] <= heap_d[j]:
                                break
                            heap_d[j], heap_d[parent] = (
                                heap_d[parent],
                                heap_d[j],
                            )
                            heap_v[j], heap_v[parent] = (
                                heap_v[parent],
                                heap_v[j],
                            )
                            j = parent


def _dijkstra_python(indptr, nbr, wt, sources, out):
    for si, src in enumerate(sources):
        dist = out[si]
        dist[:] = INF
        dist[src] = 0
        heap = [(0, int(src))]
        while heap:
            d, v = heapq.heappop(heap)
            if d > dist[v]:
                continue
            for k in range(indptr[v], indptr[v + 1]):
                u = int(nbr[k])
                nd = d + int(wt[k])
                if nd < dist[u]:
                    dist[u] = nd
                    heapq.heappush(heap, (nd, u))


def multi_source_dists(
    num_vertices: int, edges, sources, use_numba: bool | None = None
) -> np.ndarray:
    """Distance matrix (len(sources) x num_vertices); INF marks unreachable."""
    indptr, nbr, wt = build_csr(num_vertices, edges)
    src = np.asarray(sources, dtype=np.int64)
    out = np.empty((len(src), num_vertices), dtype=np.int64)
    if use_numba is None:
        use_numba = numba_enabled()
    if use_numba:
        if numba is None:
            raise RuntimeError("numba requested but not importable")
        _dijkstra_numba(indptr, nbr, wt, src, out)
    else:
        _dijkstra_python(indptr, nbr, wt, src, out)
    return out
