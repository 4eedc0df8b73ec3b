"""Microbenchmarks: determinants, decoding, and the Dijkstra kernel pair."""
from __future__ import annotations

import time

from ._dijkstra import multi_source_dists, numba_enabled
from ._rng import mix64
from .bigdet import BigMatrix, det_berkowitz, det_naive
from .isolation import SeededPrngScheme, decode
from .rotated import build_rotated_memory_graph
from .tables import PathGraph, build_path_graph, precompute_tables


def _timeit(fn, repeat: int = 3) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _random_matrix(n: int, bits: int, seed: int) -> BigMatrix:
    span = 1 << bits
    return BigMatrix(
        [
            [mix64(seed, i, j) % (2 * span + 1) - span for j in range(n)]
            for i in range(n)
        ]
    )


def bench_determinant(sizes=(4, 8, 12), bits: int = 64) -> dict:
    out = {}
    for n in sizes:
        a = _random_matrix(n, bits, seed=n)
        entry = {"berkowitz_s": _timeit(lambda: det_berkowitz(a))}
        if n <= 8:
            entry["naive_s"] = _timeit(lambda: det_naive(a))
        out[str(n)] = entry
    return out


def _synthetic_path_graph(k: int, seed: int) -> PathGraph:
    dists = [[0] * k for _ in range(k)]
    for i in range(k):
        for j in range(i + 1, k):
            dists[i][j] = dists[j][i] = 60 + mix64(seed, i, j) % 200
    mirrors = tuple(10_000 + i for i in range(k))
    mdists = tuple(60 + mix64(seed, 7, i) % 200 for i in range(k))
    return PathGraph(tuple(range(k)), mirrors, mdists, dists)


def bench_decode(sizes=(2, 4, 6, 8)) -> dict:
    out = {}
    for k in sizes:
        pg = _synthetic_path_graph(k, seed=k)
        out[str(2 * k)] = {
            "seeded_s": _timeit(
                lambda: decode(pg, SeededPrngScheme(seed=1)), repeat=2
            )
        }
    return out


def bench_dijkstra(distance: int = 5, rounds: int = 5, p: float = 1e-3) -> dict:
    """Numba kernel vs pure-Python fallback on one precompute workload."""
    graph = build_rotated_memory_graph(distance, rounds, p, 10)
    nv = len(graph.vertices)
    sources = list(range(nv))
    out: dict = {"vertices": nv, "edges": len(graph.edges)}
    d_py = multi_source_dists(nv, graph.edges, sources, use_numba=False)
    out["python_s"] = _timeit(
        lambda: multi_source_dists(nv, graph.edges, sources, use_numba=False),
        repeat=2,
    )
    if numba_enabled():
        d_nb = multi_source_dists(nv, graph.edges, sources, use_numba=True)
        out["numba_s"] = _timeit(
            lambda: multi_source_dists(nv, graph.edges, sources, use_numba=True),
            repeat=2,
        )
        out["kernels_agree"] = bool((d_py == d_nb).all())
        out["speedup"] = out["python_s"] / out["numba_s"]
    else:
        out["numba_s"] = None
        out["kernels_agree"] = None
    return out


def bench_table_precompute(distance: int = 5, rounds: int = 5) -> dict:
    graph = build_rotated_memory_graph(distance, rounds, 1e-3, 10)
    return {
        "vertices": len(graph.vertices),
        "precompute_s": _timeit(lambda: precompute_tables(graph), repeat=1),
    }


def run_all(distance: int = 5) -> dict:
    return {
        "determinant": bench_determinant(),
        "decode": bench_decode(),
        "dijkstra": bench_dijkstra(distance, distance),
        "table_precompute": bench_table_precompute(distance, distance),
    }
