"""Monte Carlo harness: memory experiments, the W_max scan, power-law fits.

Shots are pure functions of (master_seed, shot index), so results are
independent of the worker count; multi-worker runs fork after the detector
graph and lookup table are built and reduce per-shot records in shot order.
Reports are canonical JSON/CSV with no wall-clock fields, so a fixed seed
yields byte-identical files at any thread count.
"""
from __future__ import annotations

import hashlib
import io
import json
import math
import multiprocessing
from dataclasses import dataclass

from . import __version__
from ._rng import GENERATOR_NAME, mix64
from .graphs import decode_seed, sample_errors, shot_seed
from .isolation import (
    DecodeFailure,
    PerturbationScheme,
    SeededPrngScheme,
    decode,
    scheme_descriptor,
    with_seed,
)
from .rotated import build_rotated_memory_graph
from .tables import build_path_graph, matching_to_recovery, precompute_tables

SCHEMA_VERSION = 1


def build_id() -> str:
    return hashlib.sha1(f"detmwpm-{__version__}".encode()).hexdigest()[:12]


def wilson_interval(k: int, n: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion (95% by default)."""
    if n == 0:
        return (0.0, 1.0)
    phat = k / n
    denom = 1 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


@dataclass(frozen=True)
class PowerLawFit:
    """Least-squares fit of y = a * x^b on log-log points."""

    a: float
    b: float
    residual: float


def fit_power_law(points) -> PowerLawFit:
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 3:
        raise ValueError(f"power-law fit needs >= 3 points (got {len(pts)})")
    if any(x <= 0 or y <= 0 for x, y in pts):
        raise ValueError("power-law fit needs positive coordinates")
    xs = [math.log(x) for x, _ in pts]
    ys = [math.log(y) for _, y in pts]
    n = len(pts)
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    if sxx == 0:
        raise ValueError("power-law fit is degenerate: all x equal")
    b = sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sxx
    loga = my - b * mx
    residual = sum(
        (y - (loga + b * x)) ** 2 for x, y in zip(xs, ys)
    )
    return PowerLawFit(math.exp(loga), b, residual)


# -- per-shot work ------------------------------------------------------------

_CTX: dict = {}


def _set_context(**kwargs) -> None:
    _CTX.clear()
    _CTX.update(kwargs)


@dataclass(frozen=True)
class ShotRecord:
    shot: int
    path_graph_size: int
    w_max_used: int
    attempts_used: int
    failed: bool
    decode_error: bool


def _run_shot(shot: int) -> ShotRecord:
    graph = _CTX["graph"]
    table = _CTX["table"]
    scheme = _CTX["scheme"]
    master = _CTX["master_seed"]
    sample = sample_errors(graph, shot_seed(master, shot))
    pg = build_path_graph(table, sample.detection_events)
    try:
        res = decode(pg, with_seed(scheme, decode_seed(master, shot)))
    except DecodeFailure:
        return ShotRecord(shot, pg.n_vertices, 0, 0, True, True)
    rec = matching_to_recovery(pg, res.matching.pairs, table, graph)
    failed = sample.logical_flip != rec.logical_flip_correction
    return ShotRecord(
        shot, pg.n_vertices, res.w_max_used, res.attempts_used, failed, False
    )


def _map_shots(shots: int, threads: int) -> list[ShotRecord]:
    if threads <= 1 or shots < 2:
        return [_run_shot(i) for i in range(shots)]
    ctx = multiprocessing.get_context("fork")
    chunk = max(1, shots // (threads * 16))
    with ctx.Pool(threads) as pool:
        return list(pool.map(_run_shot, range(shots), chunksize=chunk))


# -- memory experiment ---------------------------------------------------------


@dataclass(frozen=True)
class MemoryExperimentResult:
    distance: int
    rounds: int
    p: float
    scale_c: int
    shots: int
    failures: int
    logical_error_rate: float
    wilson_95: tuple[float, float]
    per_shot: tuple[ShotRecord, ...]
    decode_error_shots: tuple[int, ...]
    scheme: dict
    master_seed: int

    def wmax_stats(self) -> dict[int, int]:
        """max w_max_used per encountered path-graph size."""
        stats: dict[int, int] = {}
        for r in self.per_shot:
            if r.path_graph_size and not r.decode_error:
                stats[r.path_graph_size] = max(
                    stats.get(r.path_graph_size, 0), r.w_max_used
                )
        return stats


def run_memory_experiment(
    distance: int,
    rounds: int,
    p: float,
    shots: int,
    scheme: PerturbationScheme,
    master_seed: int,
    scale_c: int = 10,
    threads: int = 1,
) -> MemoryExperimentResult:
    """Sample, decode, and correct `shots` memory-experiment shots.

    Decode failures (attempt budgets) are recorded per shot and counted as
    logical failures rather than dropped.
    """
    graph = build_rotated_memory_graph(distance, rounds, p, scale_c)
    table = precompute_tables(graph)
    _set_context(graph=graph, table=table, scheme=scheme, master_seed=master_seed)
    records = _map_shots(shots, threads)
    failures = sum(r.failed for r in records)
    return MemoryExperimentResult(
        distance=distance,
        rounds=rounds,
        p=p,
        scale_c=scale_c,
        shots=shots,
        failures=failures,
        logical_error_rate=failures / shots if shots else 0.0,
        wilson_95=wilson_interval(failures, shots),
        per_shot=tuple(records),
        decode_error_shots=tuple(r.shot for r in records if r.decode_error),
        scheme=scheme_descriptor(scheme),
        master_seed=master_seed,
    )


# -- W_max scan ----------------------------------------------------------------


@dataclass(frozen=True)
class WmaxScanRecord:
    path_graph_size: int
    min_w_max: int
    shots_at_size: int
    d_list: tuple[int, ...]
    sparse: bool


@dataclass(frozen=True)
class WmaxScanResult:
    records: tuple[WmaxScanRecord, ...]
    fit: PowerLawFit | None
    bound_curve: tuple[tuple[int, int], ...]
    d_list: tuple[int, ...]
    p: float
    scale_c: int
    shots_per_d: int
    size_cap: int
    rounds_by_d: dict[int, int]
    master_seed: int
    scheme: dict


def run_wmax_scan(
    d_list,
    p: float,
    shots_per_d: int,
    master_seed: int,
    size_cap: int = 30,
    scale_c: int = 10,
    rounds_by_d=None,
    min_samples: int = 10,
    threads: int = 1,
) -> WmaxScanResult:
    """Per path-graph size, the smallest W_max that decoded every sampled
    instance (max over shots and distances), plus a power-law fit.

    The escalating seeded-PRNG schedule starts at W_max = 2, so every record
    is >= 2.  Sizes with fewer than ``min_samples`` shots are flagged sparse
    and excluded from the fit.
    """
    if size_cap % 2:
        raise ValueError("size_cap must be even (path graphs are even-sized)")
    d_list = tuple(sorted(int(d) for d in d_list))
    rounds_by_d = dict(rounds_by_d or {})
    per_size: dict[int, dict] = {}
    for d in d_list:
        rounds = rounds_by_d.get(d, d)
        rounds_by_d[d] = rounds
        graph = build_rotated_memory_graph(d, rounds, p, scale_c)
        table = precompute_tables(graph)
        scheme = SeededPrngScheme(seed=0)
        _set_context(
            graph=graph,
            table=table,
            scheme=scheme,
            master_seed=mix64(master_seed, 0xD157, d),
        )
        for rec in _map_shots(shots_per_d, threads):
            size = rec.path_graph_size
            if size == 0 or size > size_cap or rec.decode_error:
                continue
            slot = per_size.setdefault(
                size, {"w": 0, "n": 0, "ds": set()}
            )
            slot["w"] = max(slot["w"], rec.w_max_used)
            slot["n"] += 1
            slot["ds"].add(d)
    records = tuple(
        WmaxScanRecord(
            path_graph_size=size,
            min_w_max=slot["w"],
            shots_at_size=slot["n"],
            d_list=tuple(sorted(slot["ds"])),
            sparse=slot["n"] < min_samples,
        )
        for size, slot in sorted(per_size.items())
    )
    fit_pts = [
        (r.path_graph_size, r.min_w_max) for r in records if not r.sparse
    ]
    fit = fit_power_law(fit_pts) if len(fit_pts) >= 3 else None
    curve = tuple(
        (r.path_graph_size, math.ceil(fit.a * r.path_graph_size**fit.b))
        for r in records
    ) if fit else ()
    return WmaxScanResult(
        records=records,
        fit=fit,
        bound_curve=curve,
        d_list=d_list,
        p=p,
        scale_c=scale_c,
        shots_per_d=shots_per_d,
        size_cap=size_cap,
        rounds_by_d=rounds_by_d,
        master_seed=master_seed,
        scheme=scheme_descriptor(SeededPrngScheme(seed=0)),
    )


# -- reports -------------------------------------------------------------------


def _base_report(kind: str) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "build_id": build_id(),
        "generator": GENERATOR_NAME,
    }


def experiment_report(res: MemoryExperimentResult, per_shot: bool = False) -> dict:
    doc = _base_report("memory_experiment")
    doc["params"] = {
        "distance": res.distance,
        "rounds": res.rounds,
        "p": res.p,
        "scale_c": res.scale_c,
        "shots": res.shots,
        "master_seed": res.master_seed,
        "scheme": res.scheme,
    }
    sizes: dict[str, int] = {}
    wmax_hist: dict[str, int] = {}
    for r in res.per_shot:
        sizes[str(r.path_graph_size)] = sizes.get(str(r.path_graph_size), 0) + 1
        if r.path_graph_size:
            wmax_hist[str(r.w_max_used)] = wmax_hist.get(str(r.w_max_used), 0) + 1
    doc["results"] = {
        "failures": res.failures,
        "logical_error_rate": res.logical_error_rate,
        "wilson_95": list(res.wilson_95),
        "size_histogram": sizes,
        "wmax_histogram": wmax_hist,
        "wmax_stats": {str(k): v for k, v in sorted(res.wmax_stats().items())},
        "decode_error_shots": list(res.decode_error_shots),
    }
    if per_shot:
        doc["per_shot"] = [
            {
                "shot": r.shot,
                "path_graph_size": r.path_graph_size,
                "w_max_used": r.w_max_used,
                "attempts_used": r.attempts_used,
                "failed": r.failed,
            }
            for r in res.per_shot
        ]
    return doc


def scan_report(res: WmaxScanResult) -> dict:
    doc = _base_report("wmax_scan")
    doc["params"] = {
        "d_list": list(res.d_list),
        "p": res.p,
        "scale_c": res.scale_c,
        "shots_per_d": res.shots_per_d,
        "size_cap": res.size_cap,
        "rounds_by_d": {str(k): v for k, v in sorted(res.rounds_by_d.items())},
        "master_seed": res.master_seed,
        "scheme": res.scheme,
    }
    doc["results"] = {
        "records": [
            {
                "path_graph_size": r.path_graph_size,
                "min_w_max": r.min_w_max,
                "shots_at_size": r.shots_at_size,
                "d_list": list(r.d_list),
                "sparse": r.sparse,
            }
            for r in res.records
        ],
        "fit": (
            {"a": res.fit.a, "b": res.fit.b, "residual": res.fit.residual}
            if res.fit
            else None
        ),
        "bound_curve": [list(xy) for xy in res.bound_curve],
    }
    return doc


def report_to_json(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def experiment_to_csv(res: MemoryExperimentResult) -> str:
    buf = io.StringIO()
    buf.write(
        "distance,rounds,p,scale_c,shots,failures,logical_error_rate,"
        "wilson_lo,wilson_hi,master_seed\n"
    )
    buf.write(
        f"{res.distance},{res.rounds},{res.p!r},{res.scale_c},{res.shots},"
        f"{res.failures},{res.logical_error_rate!r},{res.wilson_95[0]!r},"
        f"{res.wilson_95[1]!r},{res.master_seed}\n"
    )
    return buf.getvalue()


def scan_to_csv(res: WmaxScanResult) -> str:
    buf = io.StringIO()
    buf.write("path_graph_size,min_w_max,shots_at_size,d_list\n")
    for r in res.records:
        ds = ";".join(str(d) for d in r.d_list)
        buf.write(
            f"{r.path_graph_size},{r.min_w_max},{r.shots_at_size},{ds}\n"
        )
    return buf.getvalue()
