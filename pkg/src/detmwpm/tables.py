"""Precomputed shortest-path lookup tables and path-graph construction.

Two tables are precomputed once per detector graph by exhaustive Dijkstra:
all-pairs shortest distances between detectors, and per-pair shortest-path
edge lists (the recovery lookup), plus each detector's nearest boundary.
Decoding then builds the matching instance (the path graph) purely by table
lookups.

Determinism: nearest-boundary ties break toward the smallest boundary vertex
id; among equal-length shortest paths the lexicographically smallest edge-id
sequence (read from the smaller-id endpoint) is stored.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from ._dijkstra import INF, multi_source_dists
from .graphs import Detector, DetectorGraph, graph_hash

_MAGIC = b"DMT1"
_VERSION = 1


@dataclass
class DistanceTable:
    """All-pairs detector distances plus recovery-path lookups.

    Immutable after precompute; concurrent lookups are safe.  ``pair_paths``
    is stored flat with offsets, indexed by the upper-triangular pair index
    of (row_u, row_v), row_u < row_v.
    """

    source_graph_hash: str
    detector_ids: np.ndarray        # (D,) int64, ascending
    boundary_ids: np.ndarray        # (B,) int64, ascending
    pair_dist: np.ndarray           # (D, D) int64
    nearest_boundary_id: np.ndarray    # (D,) int64
    nearest_boundary_dist: np.ndarray  # (D,) int64
    nb_path_offsets: np.ndarray     # (D+1,) int64
    nb_path_flat: np.ndarray        # int32 edge ids
    pair_path_offsets: np.ndarray   # (D*(D-1)/2 + 1,) int64
    pair_path_flat: np.ndarray      # int32 edge ids

    def __post_init__(self):
        self._row = {int(v): i for i, v in enumerate(self.detector_ids)}

    @property
    def num_detectors(self) -> int:
        return len(self.detector_ids)

    def row_of(self, detector_id: int) -> int:
        try:
            return self._row[int(detector_id)]
        except KeyError:
            raise ValueError(
                f"vertex {detector_id} is not a detector of the bound graph"
            ) from None

    def distance(self, u: int, v: int) -> int:
        return int(self.pair_dist[self.row_of(u), self.row_of(v)])

    def _tri_index(self, ru: int, rv: int) -> int:
        d = self.num_detectors
        return ru * d - ru * (ru + 1) // 2 + (rv - ru - 1)

    def pair_path(self, u: int, v: int) -> np.ndarray:
        """Edge ids of the stored shortest path between detectors u and v."""
        ru, rv = self.row_of(u), self.row_of(v)
        if ru == rv:
            return np.empty(0, dtype=np.int32)
        if ru > rv:
            ru, rv = rv, ru
        t = self._tri_index(ru, rv)
        return self.pair_path_flat[
            self.pair_path_offsets[t]:self.pair_path_offsets[t + 1]
        ]

    def nearest_boundary(self, u: int) -> tuple[int, int, np.ndarray]:
        r = self.row_of(u)
        return (
            int(self.nearest_boundary_id[r]),
            int(self.nearest_boundary_dist[r]),
            self.nb_path_flat[
                self.nb_path_offsets[r]:self.nb_path_offsets[r + 1]
            ],
        )


def _lex_shortest_path(
    adj, dist_from_src: np.ndarray, dist_from_dst: np.ndarray,
    src: int, dst: int,
) -> list[int]:
    """Greedy lexicographically-smallest edge-id shortest path src -> dst."""
    total = int(dist_from_src[dst])
    path: list[int] = []
    x, travelled = src, 0
    while x != dst:
        for eid, y, w in adj[x]:
            if travelled + w + int(dist_from_dst[y]) == total:
                path.append(eid)
                x = y
                travelled += w
                break
        else:  # pragma: no cover - unreachable for consistent inputs
            raise RuntimeError("path reconstruction failed")
    return path


def precompute_tables(
    graph: DetectorGraph, use_numba: bool | None = None
) -> DistanceTable:
    """Exhaustive Dijkstra from every vertex; fills both lookup tables.

    Fails if some detector cannot reach any boundary vertex.  The kernel may
    process sources in parallel; the result is independent of scheduling.
    """
    nv = len(graph.vertices)
    det_ids = np.asarray(graph.detector_ids, dtype=np.int64)
    bnd_ids = np.asarray(graph.boundary_ids, dtype=np.int64)
    if len(bnd_ids) == 0:
        raise ValueError("graph has no boundary vertices")
    dists = multi_source_dists(
        nv, graph.edges, np.arange(nv, dtype=np.int64), use_numba=use_numba
    )

    d = len(det_ids)
    pair_dist = dists[np.ix_(det_ids, det_ids)]
    bdist = dists[np.ix_(det_ids, bnd_ids)]
    for r in range(d):
        if int(bdist[r].min(initial=INF)) >= INF:
            raise ValueError(
                f"detector {int(det_ids[r])} cannot reach any boundary vertex"
            )
    nb_col = np.argmin(bdist, axis=1)  # first minimum = smallest boundary id
    nb_id = bnd_ids[nb_col]
    nb_dist = bdist[np.arange(d), nb_col]

    adj: list[list[tuple[int, int, int]]] = [[] for _ in range(nv)]
    for eid, e in enumerate(graph.edges):
        adj[e.u].append((eid, e.v, e.weight))
        adj[e.v].append((eid, e.u, e.weight))
    for lst in adj:
        lst.sort()

    nb_offsets = np.zeros(d + 1, dtype=np.int64)
    nb_chunks = []
    for r in range(d):
        p = _lex_shortest_path(
            adj, dists[det_ids[r]], dists[nb_id[r]],
            int(det_ids[r]), int(nb_id[r]),
        )
        nb_chunks.append(np.asarray(p, dtype=np.int32))
        nb_offsets[r + 1] = nb_offsets[r] + len(p)

    pp_offsets = np.zeros(d * (d - 1) // 2 + 1, dtype=np.int64)
    pp_chunks = []
    t = 0
    for ru in range(d):
        du = dists[det_ids[ru]]
        for rv in range(ru + 1, d):
            p = _lex_shortest_path(
                adj, du, dists[det_ids[rv]],
                int(det_ids[ru]), int(det_ids[rv]),
            )
            pp_chunks.append(np.asarray(p, dtype=np.int32))
            pp_offsets[t + 1] = pp_offsets[t] + len(p)
            t += 1

    cat = lambda chunks: (
        np.concatenate(chunks) if chunks else np.empty(0, dtype=np.int32)
    )
    return DistanceTable(
        source_graph_hash=graph_hash(graph),
        detector_ids=det_ids,
        boundary_ids=bnd_ids,
        pair_dist=pair_dist,
        nearest_boundary_id=nb_id.astype(np.int64),
        nearest_boundary_dist=nb_dist.astype(np.int64),
        nb_path_offsets=nb_offsets,
        nb_path_flat=cat(nb_chunks),
        pair_path_offsets=pp_offsets,
        pair_path_flat=cat(pp_chunks),
    )


class PathGraph:
    """The matching instance built from a set of detection events.

    Vertices 0..k-1 are the active detectors (ascending detector id);
    vertex k+i is the mirror boundary vertex of active i.  The edge list is
    frozen in the order: all active-active pairs (lexicographic), then each
    active to its own mirror, then all mirror-mirror pairs (lexicographic,
    weight 0).  This ordering defines the edge indices e_1..e_{k^2} consumed
    by the derandomized perturbation family.
    """

    def __init__(
        self,
        actives: tuple[int, ...],
        mirrors: tuple[int, ...],
        mirror_dists: tuple[int, ...],
        active_dists,
        source_graph_hash: str | None = None,
    ):
        self.actives = actives
        self.mirrors = mirrors
        self.mirror_dists = mirror_dists
        self.source_graph_hash = source_graph_hash
        k = len(actives)
        edges: list[tuple[int, int, int]] = []
        for i in range(k):
            for j in range(i + 1, k):
                edges.append((i, j, int(active_dists[i][j])))
        for i in range(k):
            edges.append((i, k + i, int(mirror_dists[i])))
        for i in range(k):
            for j in range(i + 1, k):
                edges.append((k + i, k + j, 0))
        self.edges = tuple(edges)
        self._weight = {(u, v): w for u, v, w in edges}

    @property
    def n_active(self) -> int:
        return len(self.actives)

    @property
    def n_vertices(self) -> int:
        return 2 * len(self.actives)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def is_edge(self, u: int, v: int) -> bool:
        if u > v:
            u, v = v, u
        return (u, v) in self._weight

    def weight(self, u: int, v: int) -> int:
        if u > v:
            u, v = v, u
        return self._weight[(u, v)]

    def base_weights(self) -> tuple[int, ...]:
        return tuple(w for _, _, w in self.edges)


def build_path_graph(
    table: DistanceTable,
    events,
    expected_graph_hash: str | None = None,
) -> PathGraph:
    """Path graph from detection events, in table-lookup time.

    ``expected_graph_hash`` (when given) must match the hash the table was
    built against, guarding against decoding events from a different graph.
    """
    if (
        expected_graph_hash is not None
        and expected_graph_hash != table.source_graph_hash
    ):
        raise ValueError(
            "table/graph hash mismatch: table bound to "
            f"{table.source_graph_hash[:12]}..., got "
            f"{expected_graph_hash[:12]}..."
        )
    actives = tuple(sorted(int(v) for v in set(events)))
    rows = [table.row_of(v) for v in actives]
    mirrors = tuple(int(table.nearest_boundary_id[r]) for r in rows)
    mdists = tuple(int(table.nearest_boundary_dist[r]) for r in rows)
    k = len(actives)
    sub = table.pair_dist[np.ix_(rows, rows)] if k else np.zeros((0, 0))
    if k and int(sub.max(initial=0)) >= INF:
        raise ValueError("some pair of detection events is not connected")
    return PathGraph(actives, mirrors, mdists, sub, table.source_graph_hash)


@dataclass(frozen=True)
class RecoveryResult:
    corrected_edges: frozenset[int]
    logical_flip_correction: bool


def matching_to_recovery(
    pg: PathGraph,
    pairs,
    table: DistanceTable,
    graph: DetectorGraph,
) -> RecoveryResult:
    """Map a perfect matching of the path graph back to detector-graph edges.

    Active-active pairs contribute their stored shortest path; active-mirror
    pairs the stored nearest-boundary path; mirror-mirror pairs nothing.
    Edge ids appearing an even number of times cancel.
    """
    k = pg.n_active
    seen = [False] * pg.n_vertices
    corrected: set[int] = set()
    for a, b in pairs:
        u, v = (a, b) if a < b else (b, a)
        if not (0 <= u < v < pg.n_vertices) or seen[u] or seen[v]:
            raise ValueError(f"not a perfect matching: bad pair {(a, b)}")
        seen[u] = seen[v] = True
        if v < k:
            corrected ^= set(
                int(e) for e in table.pair_path(pg.actives[u], pg.actives[v])
            )
        elif u < k:
            if v != k + u:
                raise ValueError(
                    f"active {u} matched to a foreign mirror {v}: not an edge"
                )
            _, _, path = table.nearest_boundary(pg.actives[u])
            corrected ^= set(int(e) for e in path)
    if not all(seen):
        raise ValueError("not a perfect matching: unmatched vertices remain")
    logical = False
    for e in corrected:
        logical ^= graph.edges[e].flips_logical
    return RecoveryResult(frozenset(corrected), logical)


# -- binary table files ------------------------------------------------------


def write_table(table: DistanceTable, path) -> None:
    """Versioned binary dump; byte-identical for identical tables."""
    d = table.num_detectors
    with open(path, "wb") as f:
        f.write(_MAGIC)
        f.write(struct.pack("<I", _VERSION))
        f.write(table.source_graph_hash.encode("ascii"))
        f.write(
            struct.pack(
                "<qqqq",
                d,
                len(table.boundary_ids),
                len(table.nb_path_flat),
                len(table.pair_path_flat),
            )
        )
        for arr, dtype in (
            (table.detector_ids, np.int64),
            (table.boundary_ids, np.int64),
            (table.pair_dist, np.int64),
            (table.nearest_boundary_id, np.int64),
            (table.nearest_boundary_dist, np.int64),
            (table.nb_path_offsets, np.int64),
            (table.nb_path_flat, np.int32),
            (table.pair_path_offsets, np.int64),
            (table.pair_path_flat, np.int32),
        ):
            f.write(np.ascontiguousarray(arr, dtype=dtype).tobytes())


def read_table(path) -> DistanceTable:
    with open(path, "rb") as f:
        if f.read(4) != _MAGIC:
            raise ValueError(f"not a table file: {path}")
        (version,) = struct.unpack("<I", f.read(4))
        if version != _VERSION:
            raise ValueError(f"unsupported table version {version}")
        ghash = f.read(64).decode("ascii")
        d, b, nbf, ppf = struct.unpack("<qqqq", f.read(32))

        def arr(n, dtype):
            a = np.frombuffer(f.read(n * np.dtype(dtype).itemsize), dtype=dtype)
            return a.copy()

        det_ids = arr(d, np.int64)
        bnd_ids = arr(b, np.int64)
        pair_dist = arr(d * d, np.int64).reshape(d, d)
        nb_id = arr(d, np.int64)
        nb_dist = arr(d, np.int64)
        nb_off = arr(d + 1, np.int64)
        nb_flat = arr(nbf, np.int32)
        pp_off = arr(d * (d - 1) // 2 + 1, np.int64)
        pp_flat = arr(ppf, np.int32)
    return DistanceTable(
        ghash, det_ids, bnd_ids, pair_dist, nb_id, nb_dist,
        nb_off, nb_flat, pp_off, pp_flat,
    )


def table_to_json(table: DistanceTable) -> str:
    """Human-readable dump used by ``detmwpm table inspect``."""
    d = table.num_detectors
    pair_paths = {}
    t = 0
    for ru in range(d):
        for rv in range(ru + 1, d):
            u, v = int(table.detector_ids[ru]), int(table.detector_ids[rv])
            lo, hi = table.pair_path_offsets[t], table.pair_path_offsets[t + 1]
            pair_paths[f"{u},{v}"] = [int(e) for e in table.pair_path_flat[lo:hi]]
            t += 1
    doc = {
        "version": _VERSION,
        "graph_hash": table.source_graph_hash,
        "num_detectors": d,
        "detector_ids": [int(x) for x in table.detector_ids],
        "boundary_ids": [int(x) for x in table.boundary_ids],
        "pair_dist": [[int(x) for x in row] for row in table.pair_dist],
        "nearest_boundary": [
            {
                "detector": int(table.detector_ids[r]),
                "boundary": int(table.nearest_boundary_id[r]),
                "dist": int(table.nearest_boundary_dist[r]),
                "path": [
                    int(e)
                    for e in table.nb_path_flat[
                        table.nb_path_offsets[r]:table.nb_path_offsets[r + 1]
                    ]
                ],
            }
            for r in range(d)
        ],
        "pair_paths": pair_paths,
    }
    return json.dumps(doc, sort_keys=True, indent=1)
