"""Detector graphs: weighted matching graphs over detectors and boundaries.

A detector graph is a simple weighted graph whose vertices are detectors
(parities of measurement outcomes that are deterministically 0 without
faults) plus space-like and time-like boundary vertices.  Each edge models a
set of fault mechanisms that flip exactly its endpoint detectors; the edge
carries the union-bound probability of those mechanisms, an integer weight
``ceil(-C * ln(prob))``, and a flag saying whether the mechanisms flip the
tracked logical observable.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from ._rng import MASK64, mix64, uniforms

PROB_CLAMP = 1.0 - 1e-9


class ModelError(ValueError):
    """An ill-formed noise model (e.g. conflicting logical flags)."""


@dataclass(frozen=True)
class Detector:
    round: int
    stabilizer: int


@dataclass(frozen=True)
class SpaceBoundary:
    pass


@dataclass(frozen=True)
class TimeBoundary:
    pass


VertexKind = Detector | SpaceBoundary | TimeBoundary


@dataclass(frozen=True)
class Edge:
    u: int
    v: int
    prob: float
    weight: int
    flips_logical: bool


class Mechanism(NamedTuple):
    """One raw fault mechanism, before merging into graph edges."""

    u: int
    v: int
    prob: float
    flips_logical: bool = False


class MergedMechanism(NamedTuple):
    u: int
    v: int
    prob: float
    flips_logical: bool
    n_sources: int
    clamped: bool


def integer_weight(prob: float, scale_c: int) -> int:
    """``ceil(-C * ln(prob))`` (natural log; any base is absorbed by C)."""
    if not 0.0 < prob < 1.0:
        raise ValueError(f"probability out of range (0,1): {prob}")
    return math.ceil(-scale_c * math.log(prob))


def merge_parallel_mechanisms(
    raw: Iterable[tuple | Mechanism],
) -> list[MergedMechanism]:
    """Merge mechanisms that share an endpoint pair into single edges.

    Merged probability is the union bound ``sum(p_j)``, clamped just below 1
    (clamping is flagged).  All mechanisms mapped onto one edge must agree on
    ``flips_logical``; a conflict means the noise model cannot be expressed
    as an edge-weighted matching graph and raises :class:`ModelError`.

    The result is sorted by endpoint pair and independent of input order.
    """
    acc: dict[tuple[int, int], list] = {}
    for mech in raw:
        m = Mechanism(*mech)
        if not 0.0 < m.prob < 1.0:
            raise ValueError(f"mechanism probability out of range (0,1): {m}")
        if m.u == m.v:
            raise ModelError(f"self-loop mechanism on vertex {m.u}")
        key = (m.u, m.v) if m.u < m.v else (m.v, m.u)
        slot = acc.get(key)
        if slot is None:
            acc[key] = [m.prob, m.flips_logical, 1]
        else:
            if slot[1] != m.flips_logical:
                raise ModelError(
                    f"conflicting flips_logical among mechanisms for edge {key}"
                )
            slot[0] += m.prob
            slot[2] += 1
    out = []
    for (u, v), (prob, flips, n) in sorted(acc.items()):
        clamped = prob > PROB_CLAMP
        out.append(
            MergedMechanism(u, v, min(prob, PROB_CLAMP), flips, n, clamped)
        )
    return out


@dataclass(frozen=True)
class DetectorGraph:
    """Immutable detector graph; safely shareable across threads.

    ``distance`` and ``rounds`` are header metadata describing the generating
    code family (0 when the graph was built by hand).
    """

    vertices: tuple[VertexKind, ...]
    edges: tuple[Edge, ...]
    scale_c: int
    distance: int = 0
    rounds: int = 0

    def __post_init__(self):
        if self.scale_c < 1:
            raise ValueError("scale_c must be a positive integer")
        nv = len(self.vertices)
        seen = set()
        for i, e in enumerate(self.edges):
            if not (0 <= e.u < nv and 0 <= e.v < nv):
                raise ValueError(f"edge {i} endpoint out of range")
            if e.u == e.v:
                raise ValueError(f"edge {i} is a self-loop")
            key = (e.u, e.v) if e.u < e.v else (e.v, e.u)
            if key in seen:
                raise ValueError(f"parallel edge on pair {key}")
            seen.add(key)
            ku, kv = self.vertices[e.u], self.vertices[e.v]
            if not (isinstance(ku, Detector) or isinstance(kv, Detector)):
                raise ValueError(f"edge {i} joins two boundary vertices")
            if e.weight != integer_weight(e.prob, self.scale_c):
                raise ValueError(
                    f"edge {i} weight {e.weight} inconsistent with prob {e.prob}"
                )

    @cached_property
    def num_detectors(self) -> int:
        return sum(isinstance(v, Detector) for v in self.vertices)

    @cached_property
    def detector_ids(self) -> tuple[int, ...]:
        return tuple(
            i for i, v in enumerate(self.vertices) if isinstance(v, Detector)
        )

    @cached_property
    def boundary_ids(self) -> tuple[int, ...]:
        return tuple(
            i
            for i, v in enumerate(self.vertices)
            if not isinstance(v, Detector)
        )

    @cached_property
    def _edge_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        eu = np.fromiter((e.u for e in self.edges), dtype=np.int64)
        ev = np.fromiter((e.v for e in self.edges), dtype=np.int64)
        probs = np.fromiter((e.prob for e in self.edges), dtype=np.float64)
        flips = np.fromiter(
            (e.flips_logical for e in self.edges), dtype=np.bool_
        )
        return eu, ev, probs, flips

    @cached_property
    def _is_detector(self) -> np.ndarray:
        return np.fromiter(
            (isinstance(v, Detector) for v in self.vertices), dtype=np.bool_
        )

    def edge_index(self, u: int, v: int) -> int | None:
        return self._edge_lookup.get((u, v) if u < v else (v, u))

    @cached_property
    def _edge_lookup(self) -> dict[tuple[int, int], int]:
        return {
            (min(e.u, e.v), max(e.u, e.v)): i for i, e in enumerate(self.edges)
        }

    def max_degree(self) -> int:
        deg = np.zeros(len(self.vertices), dtype=np.int64)
        eu, ev, _, _ = self._edge_arrays
        np.add.at(deg, eu, 1)
        np.add.at(deg, ev, 1)
        return int(deg.max(initial=0))


@dataclass(frozen=True)
class ErrorSample:
    flipped_edges: frozenset[int]
    detection_events: frozenset[int]
    logical_flip: bool


def detection_events_of(
    graph: DetectorGraph, flipped_edges: Iterable[int]
) -> frozenset[int]:
    """Detectors incident to an odd number of flipped edges."""
    parity = np.zeros(len(graph.vertices), dtype=np.uint8)
    for e in flipped_edges:
        edge = graph.edges[e]
        parity[edge.u] ^= 1
        parity[edge.v] ^= 1
    active = np.nonzero(parity & graph._is_detector)[0]
    return frozenset(int(i) for i in active)


def sample_errors(graph: DetectorGraph, rng_seed: int) -> ErrorSample:
    """Flip each edge independently with its probability (deterministic)."""
    eu, ev, probs, flips = graph._edge_arrays
    if len(graph.edges) == 0:
        return ErrorSample(frozenset(), frozenset(), False)
    u = uniforms(rng_seed & MASK64, len(graph.edges))
    hit = np.nonzero(u < probs)[0]
    parity = np.zeros(len(graph.vertices), dtype=np.uint8)
    np.bitwise_xor.at(parity, eu[hit], np.uint8(1))
    np.bitwise_xor.at(parity, ev[hit], np.uint8(1))
    active = np.nonzero(parity & graph._is_detector)[0]
    logical = bool(np.bitwise_xor.reduce(flips[hit]) if hit.size else False)
    return ErrorSample(
        frozenset(int(i) for i in hit),
        frozenset(int(i) for i in active),
        logical,
    )


def shot_seed(master_seed: int, shot: int) -> int:
    """Per-shot sampling seed; depends only on (master_seed, shot)."""
    return mix64(master_seed, 0x5A17, shot)


def decode_seed(master_seed: int, shot: int) -> int:
    """Per-shot perturbation-scheme seed."""
    return mix64(master_seed, 0xDEC0, shot)


# -- serialization -----------------------------------------------------------

_FORMAT_VERSION = 1


def serialize_graph(graph: DetectorGraph) -> str:
    """Deterministic, self-describing text form (byte-identical per input)."""
    lines = [
        f"detgraph {_FORMAT_VERSION} d={graph.distance} rounds={graph.rounds} "
        f"C={graph.scale_c}"
    ]
    for i, v in enumerate(graph.vertices):
        if isinstance(v, Detector):
            lines.append(f"V {i} D {v.round} {v.stabilizer}")
        elif isinstance(v, SpaceBoundary):
            lines.append(f"V {i} SB")
        else:
            lines.append(f"V {i} TB")
    for i, e in enumerate(graph.edges):
        lines.append(
            f"E {i} {e.u} {e.v} {e.prob!r} {e.weight} "
            f"{1 if e.flips_logical else 0}"
        )
    return "\n".join(lines) + "\n"


def parse_graph(text: str) -> DetectorGraph:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    head = lines[0].split()
    if head[0] != "detgraph" or int(head[1]) != _FORMAT_VERSION:
        raise ValueError(f"unsupported graph header: {lines[0]!r}")
    meta = dict(kv.split("=") for kv in head[2:])
    vertices: list[VertexKind] = []
    edges: list[Edge] = []
    for ln in lines[1:]:
        parts = ln.split()
        if parts[0] == "V":
            if int(parts[1]) != len(vertices):
                raise ValueError(f"vertex ids must be consecutive: {ln!r}")
            if parts[2] == "D":
                vertices.append(Detector(int(parts[3]), int(parts[4])))
            elif parts[2] == "SB":
                vertices.append(SpaceBoundary())
            elif parts[2] == "TB":
                vertices.append(TimeBoundary())
            else:
                raise ValueError(f"unknown vertex kind: {ln!r}")
        elif parts[0] == "E":
            if int(parts[1]) != len(edges):
                raise ValueError(f"edge ids must be consecutive: {ln!r}")
            edges.append(
                Edge(
                    int(parts[2]),
                    int(parts[3]),
                    float(parts[4]),
                    int(parts[5]),
                    parts[6] == "1",
                )
            )
        else:
            raise ValueError(f"unrecognized line: {ln!r}")
    return DetectorGraph(
        tuple(vertices),
        tuple(edges),
        int(meta["C"]),
        int(meta["d"]),
        int(meta["rounds"]),
    )


def graph_hash(graph: DetectorGraph) -> str:
    """Digest binding derived artifacts (tables) to this graph."""
    return hashlib.sha256(serialize_graph(graph).encode()).hexdigest()
