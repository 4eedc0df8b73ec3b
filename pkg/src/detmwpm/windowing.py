"""Sliding-window decoding over a round stream, plus timing calculators.

The round stream is split into windows of ``n_com`` commit rounds followed
by ``n_buf`` buffer rounds, advancing by ``n_com``.  Each window is decoded
in full; only corrections whose earlier endpoint lies in the commit region
are accepted, and accepted corrections that cross the commit/buffer cut
toggle artificial detection events on the first round of the next window
(whose detectors are closed boundaries).  The final window commits
everything.  A single window covering the whole stream reproduces the
whole-history decode bit for bit.

The timing calculators evaluate the backlog throughput condition and the
gate-teleportation reaction time for both sliding-window and
parallel-window decoding.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ._rng import mix64
from .graphs import Detector, DetectorGraph, TimeBoundary, graph_hash
from .isolation import DecodeResult, PerturbationScheme, decode, with_seed
from .rotated import build_window_graph, z_stabilizers
from .tables import (
    DistanceTable,
    build_path_graph,
    matching_to_recovery,
    precompute_tables,
)


@dataclass(frozen=True)
class WindowConfig:
    """Commit/buffer split; the buffer defaults to d rounds."""

    distance: int
    n_com: int
    n_buf: int | None = None

    def __post_init__(self):
        if self.n_com < 1:
            raise ValueError("n_com must be >= 1")
        if self.n_buf is None:
            object.__setattr__(self, "n_buf", self.distance)
        if self.n_buf < 0:
            raise ValueError("n_buf must be >= 0")


@dataclass(frozen=True)
class TimingModel:
    """Abstract time units: per-round syndrome generation, IO latency,
    per-window decode time."""

    tau_sg: float
    tau_l: float
    t_w: float

    def __post_init__(self):
        if self.tau_sg < 0 or self.tau_l < 0 or self.t_w < 0:
            raise ValueError("timing parameters must be non-negative")


def throughput_ok(tm: TimingModel, cfg: WindowConfig) -> bool:
    """Backlog-avoidance condition T_w < tau_sg * n_com (strict)."""
    return tm.t_w < tm.tau_sg * cfg.n_com


def _reaction_domain(tm: TimingModel, d: int) -> tuple[Fraction, Fraction, Fraction]:
    dt = Fraction(d) * Fraction(tm.tau_sg)
    tw = Fraction(tm.t_w)
    tl = Fraction(tm.tau_l)
    if not 0 < tw < dt:
        raise ValueError(
            f"reaction time requires 0 < t_w < d*tau_sg (t_w={tm.t_w}, "
            f"d*tau_sg={float(dt)})"
        )
    return dt, tw, tl


def reaction_time(tm: TimingModel, d: int) -> float:
    """Closed form: 2 d tau_sg + d tau_sg * ceil((tau_l + T_w)/(d tau_sg) - 1)."""
    dt, tw, tl = _reaction_domain(tm, d)
    return float(2 * dt + dt * math.ceil((tl + tw) / dt - 1))

def reaction_time_cases(tm: TimingModel, d: int) -> float:
    """Case form with the threshold Delta; equivalent to the closed form."""
    dt, tw, tl = _reaction_domain(tm, d)
    delta = dt * (1 + math.ceil(tl / dt - 1)) - tl
    if tw <= delta:
        return float(2 * dt + dt * math.ceil(tl / dt - 1))
    return float(2 * dt + dt * math.ceil(tl / dt))


def reaction_time_parallel(tm: TimingModel, d: int) -> float:
    """Parallel-window analogue, valid for any positive T_w."""
    dt = Fraction(d) * Fraction(tm.tau_sg)
    if dt <= 0 or tm.t_w <= 0:
        raise ValueError("parallel reaction time requires t_w > 0, tau_sg > 0")
    tw = Fraction(tm.t_w)
    tl = Fraction(tm.tau_l)
    return float(2 * dt + dt * math.ceil((tl + 2 * tw) / dt - 1))


# -- sliding-window decoding -------------------------------------------------


@dataclass(frozen=True)
class WindowRecord:
    index: int
    start_round: int
    end_round: int
    commit_end: int
    n_events: int
    path_graph_size: int
    attempts_used: int
    w_max_used: int
    committed_edges: int
    artificial_events: tuple[int, ...]
    logical_parity: bool

    def to_record(self) -> dict:
        return {
            "window": self.index,
            "rounds": [self.start_round, self.end_round],
            "commit_end": self.commit_end,
            "events": self.n_events,
            "path_graph_size": self.path_graph_size,
            "attempts_used": self.attempts_used,
            "w_max_used": self.w_max_used,
            "committed_edges": self.committed_edges,
            "artificial_events": list(self.artificial_events),
            "logical_parity": self.logical_parity,
        }


@dataclass(frozen=True)
class WindowRunResult:
    windows: tuple[WindowRecord, ...]
    logical_flip_correction: bool
    committed: frozenset[tuple]


class WindowDecodeError(RuntimeError):
    def __init__(self, window_index: int, cause: Exception):
        super().__init__(f"decoding failed in window {window_index}: {cause}")
        self.window_index = window_index


class SlidingWindowDecoder:
    """Streaming decoder for a rotated-code memory experiment.

    Window detector graphs come in a finite set of types keyed by (length,
    open-endedness); each type's lookup table is precomputed once and cached.
    Decoding is sequential across windows by definition; each window decode
    follows the perturbation scheme, reseeded per window start round.
    """

    def __init__(
        self,
        distance: int,
        p: float,
        scale_c: int,
        cfg: WindowConfig,
        scheme: PerturbationScheme,
        master_seed: int = 0,
    ):
        self.distance = distance
        self.p = p
        self.scale_c = scale_c
        self.cfg = cfg
        self.scheme = scheme
        self.master_seed = master_seed
        self.stabilizers_per_round = (distance * distance - 1) // 2
        self._types: dict[tuple[int, bool], tuple[DetectorGraph, DistanceTable, str]] = {}

    def _window_type(self, length: int, open_end: bool):
        key = (length, open_end)
        if key not in self._types:
            g = build_window_graph(
                self.distance, length, self.p, self.scale_c, open_end
            )
            t = precompute_tables(g)
            self._types[key] = (g, t, graph_hash(g))
        return self._types[key]

    def run(self, events_per_round: Sequence[Sequence[int]]) -> WindowRunResult:
        s = self.stabilizers_per_round
        total = len(events_per_round)
        n_com, n_buf = self.cfg.n_com, self.cfg.n_buf
        if total % n_com:
            raise ValueError(
                f"total rounds {total} not divisible into {n_com}-round commits"
            )
        for t, evs in enumerate(events_per_round):
            for j in evs:
                if not 0 <= j < s:
                    raise ValueError(f"round {t}: stabilizer id {j} out of range")
        records = []
        committed_keys: set[tuple] = set()
        toggles: frozenset[int] = frozenset()
        total_parity = False
        w = 0
        a = 0
        while a < total:
            is_last = a + n_com >= total
            b = total if is_last else min(a + n_com + n_buf, total)
            c = total if is_last else a + n_com
            graph_w, table_w, ghash = self._window_type(b - a, b < total)
            events = set()
            for t in range(a, b):
                for j in events_per_round[t]:
                    events.add((t - a) * s + j)
            events ^= {j for j in toggles}  # artificial events at local round 0
            try:
                pg = build_path_graph(table_w, events, ghash)
                res = decode(
                    pg, with_seed(self.scheme, mix64(self.master_seed, 0x717D, a))
                )
                rec = matching_to_recovery(
                    pg, res.matching.pairs, table_w, graph_w
                )
            except Exception as exc:
                raise WindowDecodeError(w, exc) from exc
            committed = []
            for eid in sorted(rec.corrected_edges):
                edge = graph_w.edges[eid]
                rounds = [
                    graph_w.vertices[x].round
                    for x in (edge.u, edge.v)
                    if isinstance(graph_w.vertices[x], Detector)
                ]
                if min(rounds) + a < c:
                    committed.append(eid)
            parity = False
            new_toggles = set()
            for eid in committed:
                edge = graph_w.edges[eid]
                parity ^= edge.flips_logical
                committed_keys.add(self._global_key(graph_w, edge, a))
                for x in (edge.u, edge.v):
                    kind = graph_w.vertices[x]
                    if isinstance(kind, Detector) and kind.round + a >= c:
                        new_toggles.add(kind.stabilizer)
                    elif isinstance(kind, TimeBoundary):
                        # committable only with an empty buffer; treat the
                        # merged cut edge as its time-like mechanism
                        other = graph_w.vertices[
                            edge.v if x == edge.u else edge.u
                        ]
                        new_toggles.add(other.stabilizer)
            total_parity ^= parity
            records.append(
                WindowRecord(
                    index=w,
                    start_round=a,
                    end_round=b,
                    commit_end=c,
                    n_events=len(events),
                    path_graph_size=pg.n_vertices,
                    attempts_used=res.attempts_used,
                    w_max_used=res.w_max_used,
                    committed_edges=len(committed),
                    artificial_events=tuple(sorted(new_toggles)),
                    logical_parity=parity,
                )
            )
            toggles = frozenset(new_toggles)
            a += n_com
            w += 1
        return WindowRunResult(
            tuple(records), total_parity, frozenset(committed_keys)
        )

    def _global_key(self, graph_w: DetectorGraph, edge, offset: int) -> tuple:
        def key(x):
            kind = graph_w.vertices[x]
            if isinstance(kind, Detector):
                return ("D", kind.round + offset, kind.stabilizer)
            if isinstance(kind, TimeBoundary):
                return ("TB", graph_w.rounds + offset)
            # the two space boundaries keep their relative order in every slice
            return ("SB", graph_w.boundary_ids.index(x))

        return tuple(sorted((key(edge.u), key(edge.v))))


def sliding_window_decode(
    distance: int,
    p: float,
    scale_c: int,
    events_per_round: Sequence[Sequence[int]],
    cfg: WindowConfig,
    scheme: PerturbationScheme,
    master_seed: int = 0,
) -> WindowRunResult:
    """Decode a round stream window by window (see SlidingWindowDecoder)."""
    dec = SlidingWindowDecoder(distance, p, scale_c, cfg, scheme, master_seed)
    return dec.run(events_per_round)


def parse_round_stream(lines) -> list[list[int]]:
    """Parse 'round_index id id ...' lines into per-round event lists."""
    rounds: list[list[int]] = []
    for raw in lines:
        ln = raw.strip()
        if not ln:
            continue
        parts = ln.split()
        idx = int(parts[0])
        if idx != len(rounds):
            raise ValueError(
                f"round indices must be consecutive from 0; got {idx} after "
                f"{len(rounds) - 1}"
            )
        rounds.append([int(x) for x in parts[1:]])
    return rounds


def events_to_rounds(
    graph: DetectorGraph, detection_events
) -> list[list[int]]:
    """Split whole-history detection events into per-round stabilizer lists."""
    out: list[list[int]] = [[] for _ in range(graph.rounds)]
    for v in detection_events:
        kind = graph.vertices[v]
        if not isinstance(kind, Detector):
            raise ValueError(f"vertex {v} is not a detector")
        out[kind.round].append(kind.stabilizer)
    for lst in out:
        lst.sort()
    return out
