"""Rotated-surface-code memory-experiment detector graphs.

One basis is decoded: detectors are the Z-type stabilizers of a distance-d
rotated surface code, measured over a number of detector rounds.  The
experiment starts from a codeword (first-round stabilizer values are
deterministic) and ends with destructive data-qubit measurements (the final
detector round is computed from those measurements, so it has no time
boundary).  The noise model is edge-based: every mechanism below flips
independently with probability p.

* space-like edges, one per data qubit per round: the qubit's X error flips
  the adjacent Z-stabilizers of that round (or one stabilizer plus a space
  boundary for qubits on the top/bottom lattice edge);
* time-like edges between consecutive rounds: an ancilla measurement error
  flips the same stabilizer in both rounds;
* space-time diagonal edges between consecutive rounds: hook faults during
  syndrome extraction, one per bulk data qubit, connecting its two adjacent
  stabilizers across the round boundary.

The logical observable is the parity of X errors on the top row of data
qubits; exactly the top-boundary space edges carry ``flips_logical``.
"""
from __future__ import annotations

from functools import lru_cache

from .graphs import DetectorGraph, Detector, Edge, Mechanism, SpaceBoundary, \
    TimeBoundary, integer_weight, merge_parallel_mechanisms


@lru_cache(maxsize=None)
def z_stabilizers(distance: int) -> tuple[tuple[tuple[int, int], ...], ...]:
    """Data-qubit supports of the Z-type stabilizers, ordered by plaquette.

    Data qubits sit at integer coordinates (row, col) in [0, d)^2.  Plaquettes
    are indexed by their upper-left corner (r, c) with r, c in [-1, d-1]; a
    plaquette is Z-type iff (r + c) is even.  Interior plaquettes of both
    types are kept; weight-2 boundary plaquettes are kept only when their type
    matches the side (Z on the left/right columns, X on the top/bottom rows).
    """
    d = distance
    out = []
    for r in range(-1, d):
        for c in range(-1, d):
            qs = tuple(
                sorted(
                    (rr, cc)
                    for rr in (r, r + 1)
                    for cc in (c, c + 1)
                    if 0 <= rr < d and 0 <= cc < d
                )
            )
            if len(qs) < 2:
                continue
            if (r + c) % 2 != 0:
                continue
            interior = 0 <= r < d - 1 and 0 <= c < d - 1
            on_side = (c == -1 or c == d - 1) and 0 <= r < d - 1
            if interior or on_side:
                out.append(((r, c), qs))
    out.sort()
    stabs = tuple(qs for _, qs in out)
    assert len(stabs) == (d * d - 1) // 2
    return stabs


@lru_cache(maxsize=None)
def _qubit_stabs(distance: int) -> dict[tuple[int, int], tuple[int, ...]]:
    q2s: dict[tuple[int, int], list[int]] = {}
    for j, qs in enumerate(z_stabilizers(distance)):
        for q in qs:
            q2s.setdefault(q, []).append(j)
    return {q: tuple(sorted(js)) for q, js in q2s.items()}


def _mechanisms(
    distance: int, rounds: int, p: float, open_end: bool
) -> tuple[list[Mechanism], int, int, int]:
    """All fault mechanisms plus the (top, bottom, time) boundary vertex ids.

    Vertex layout: detector (round t, stabilizer j) has id t*S + j, then the
    top space boundary, the bottom space boundary, and (only when
    ``open_end``) a single time boundary vertex.
    """
    d, s = distance, (distance * distance - 1) // 2
    q2s = _qubit_stabs(d)
    top = rounds * s
    bottom = top + 1
    tb = bottom + 1 if open_end else -1
    det = lambda t, j: t * s + j
    mechs: list[Mechanism] = []
    for t in range(rounds):
        for q in sorted(q2s):
            js = q2s[q]
            flip = q[0] == 0
            if len(js) == 2:
                mechs.append(Mechanism(det(t, js[0]), det(t, js[1]), p, flip))
            elif q[0] == 0:
                mechs.append(Mechanism(det(t, js[0]), top, p, flip))
            else:
                mechs.append(Mechanism(det(t, js[0]), bottom, p, flip))
    for t in range(1, rounds):
        for j in range(s):
            mechs.append(Mechanism(det(t - 1, j), det(t, j), p, False))
    for t in range(1, rounds):
        for q in sorted(q2s):
            js = q2s[q]
            if len(js) == 2:
                mechs.append(Mechanism(det(t - 1, js[0]), det(t, js[1]), p,
                                       q[0] == 0))
    if open_end:
        # mechanisms crossing the cut flip only their in-window endpoint
        for j in range(s):
            mechs.append(Mechanism(det(rounds - 1, j), tb, p, False))
        for q in sorted(q2s):
            js = q2s[q]
            if len(js) == 2:
                mechs.append(Mechanism(det(rounds - 1, js[0]), tb, p, False))
    return mechs, top, bottom, tb


def _assemble(
    distance: int, rounds: int, p: float, scale_c: int, open_end: bool
) -> DetectorGraph:
    if distance < 3 or distance % 2 == 0:
        raise ValueError(f"distance must be an odd integer >= 3: {distance}")
    if rounds < 1:
        raise ValueError(f"rounds must be >= 1: {rounds}")
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0,1): {p}")
    s = (distance * distance - 1) // 2
    mechs, top, bottom, tb = _mechanisms(distance, rounds, p, open_end)
    vertices: list = [
        Detector(t, j) for t in range(rounds) for j in range(s)
    ]
    vertices.append(SpaceBoundary())
    vertices.append(SpaceBoundary())
    if open_end:
        vertices.append(TimeBoundary())
    edges = tuple(
        Edge(m.u, m.v, m.prob, integer_weight(m.prob, scale_c),
             m.flips_logical)
        for m in merge_parallel_mechanisms(mechs)
    )
    return DetectorGraph(tuple(vertices), edges, scale_c, distance, rounds)


def build_rotated_memory_graph(
    distance: int, rounds: int, p: float, scale_c: int
) -> DetectorGraph:
    """Detector graph of a d x d rotated-surface-code memory experiment.

    ``rounds`` counts detector rounds; the experiment behind them has
    ``rounds - 1`` ancilla syndrome-extraction rounds followed by the
    destructive data measurement.  num_detectors = rounds * (d^2 - 1) / 2.
    """
    return _assemble(distance, rounds, p, scale_c, open_end=False)


def build_window_graph(
    distance: int, window_rounds: int, p: float, scale_c: int, open_end: bool
) -> DetectorGraph:
    """Detector graph of one sliding-window slice (rounds relabelled from 0).

    ``open_end=True`` models a window whose final round faces not-yet-decoded
    rounds: mechanisms crossing the cut become edges to a time boundary
    vertex.  The window's first round is always a closed boundary (mechanisms
    crossing from earlier rounds are accounted for by artificial detection
    events, not by edges).  A slice covering the full experiment history is
    byte-identical to :func:`build_rotated_memory_graph`.
    """
    return _assemble(distance, window_rounds, p, scale_c, open_end=open_end)
