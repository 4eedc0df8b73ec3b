"""Ground-truth perfect-matching oracle by exhaustive enumeration.

Used by every soundness test; intentionally refuses instances beyond desk
size (double-factorial growth).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from .isolation import Matching
from .tables import PathGraph

ENUMERATE_MAX_VERTICES = 12
BRUTE_FORCE_MAX_VERTICES = 14


def _adjacency(pg: PathGraph) -> list[list[int]]:
    adj: list[list[int]] = [[] for _ in range(pg.n_vertices)]
    for u, v, _ in pg.edges:
        adj[u].append(v)
        adj[v].append(u)
    for lst in adj:
        lst.sort()
    return adj


def _enumerate(pg: PathGraph) -> Iterator[tuple[tuple[int, int], ...]]:
    adj = _adjacency(pg)
    nv = pg.n_vertices
    matched = [False] * nv

    def rec(chosen: list[tuple[int, int]]) -> Iterator[tuple]:
        u = next((i for i in range(nv) if not matched[i]), None)
        if u is None:
            yield tuple(chosen)
            return
        matched[u] = True
        for v in adj[u]:
            if not matched[v]:
                matched[v] = True
                chosen.append((u, v))
                yield from rec(chosen)
                chosen.pop()
                matched[v] = False
        matched[u] = False

    yield from rec([])


def enumerate_perfect_matchings(pg: PathGraph) -> Iterator[Matching]:
    """Every perfect matching exactly once, in deterministic order."""
    if pg.n_vertices > ENUMERATE_MAX_VERTICES:
        raise ValueError(
            f"enumeration refuses |V| > {ENUMERATE_MAX_VERTICES} "
            f"(got {pg.n_vertices})"
        )
    for pairs in _enumerate(pg):
        yield Matching(pairs, sum(pg.weight(u, v) for u, v in pairs))


@dataclass(frozen=True)
class BruteForceResult:
    weight: int
    one_matching: Matching
    count_of_minima: int


def brute_force_mwpm(pg: PathGraph) -> BruteForceResult:
    """Minimum weight, one lexicographically-smallest witness, and the number
    of distinct minimum-weight matchings (degeneracy count)."""
    if pg.n_vertices > BRUTE_FORCE_MAX_VERTICES:
        raise ValueError(
            f"brute force refuses |V| > {BRUTE_FORCE_MAX_VERTICES} "
            f"(got {pg.n_vertices})"
        )
    best_weight = None
    best_pairs = None
    count = 0
    for pairs in _enumerate(pg):
        w = sum(pg.weight(u, v) for u, v in pairs)
        if best_weight is None or w < best_weight:
            best_weight, best_pairs, count = w, pairs, 1
        elif w == best_weight:
            count += 1
            if pairs < best_pairs:
                best_pairs = pairs
    if best_weight is None:
        raise ValueError("graph has no perfect matching")
    return BruteForceResult(best_weight, Matching(best_pairs, best_weight), count)
