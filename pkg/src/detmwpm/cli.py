"""Command-line interface.

Subcommands: precompute, table inspect, decode, experiment, wmax-scan,
window-run, timing, bench, selftest.  Exit status: 0 success, 1 usage
error, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import json
import sys
import time

from . import __version__, bench as bench_mod
from .graphs import graph_hash, parse_graph, serialize_graph
from .isolation import (
    DerandomizedFamilyScheme,
    RandomizedScheme,
    SeededPrngScheme,
    decode,
)
from .experiments import (
    experiment_report,
    experiment_to_csv,
    report_to_json,
    run_memory_experiment,
    run_wmax_scan,
    scan_report,
    scan_to_csv,
)
from .rotated import build_rotated_memory_graph
from .tables import (
    build_path_graph,
    matching_to_recovery,
    precompute_tables,
    read_table,
    table_to_json,
    write_table,
)
from .windowing import (
    TimingModel,
    WindowConfig,
    parse_round_stream,
    reaction_time,
    reaction_time_parallel,
    sliding_window_decode,
    throughput_ok,
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--seed", type=int, default=0, help="master seed")
    sub.add_argument("--threads", type=int, default=1, help="worker processes")
    sub.add_argument("--format", choices=("json", "csv"), default="json")
    sub.add_argument("--out", help="output file (default: stdout)")


def _scheme_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument(
        "--scheme",
        choices=("seeded", "randomized", "derandomized"),
        default="seeded",
    )
    sub.add_argument("--w-max", type=int, default=None,
                     help="randomized: perturbation range bound")
    sub.add_argument("--attempts", type=int, default=64,
                     help="randomized: attempt budget")
    sub.add_argument("--family-s", type=int, default=2)
    sub.add_argument("--family-t", type=int, default=7)


def _make_scheme(args, seed: int):
    if args.scheme == "seeded":
        return SeededPrngScheme(seed=seed)
    if args.scheme == "randomized":
        if args.w_max is None:
            raise _UsageError("--w-max is required for --scheme randomized")
        return RandomizedScheme(w_max=args.w_max, attempts=args.attempts,
                                seed=seed)
    return DerandomizedFamilyScheme(s=args.family_s, t=args.family_t)


def _build_parser() -> _Parser:
    ap = _Parser(prog="detmwpm", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    sp = ap.add_subparsers(dest="command", required=True)

    pre = sp.add_parser("precompute", help="build a detector graph and its table")
    _common(pre)
    pre.add_argument("--graph-in", help="existing graph file instead of generating")
    pre.add_argument("--distance", type=int)
    pre.add_argument("--rounds", type=int)
    pre.add_argument("--p", type=float, default=1e-3)
    pre.add_argument("--scale-c", type=int, default=10)
    pre.add_argument("--graph-out", help="write the graph text file here")
    pre.add_argument("--table-out", required=True)

    tab = sp.add_parser("table", help="table file utilities")
    tsp = tab.add_subparsers(dest="table_command", required=True)
    ins = tsp.add_parser("inspect", help="dump a table file as JSON")
    _common(ins)
    ins.add_argument("table_file")

    dec = sp.add_parser("decode", help="decode one set of detection events")
    _common(dec)
    _scheme_args(dec)
    dec.add_argument("--graph", required=True)
    dec.add_argument("--table", required=True)
    dec.add_argument("--events", required=True,
                     help="file of whitespace-separated detector ids")

    exp = sp.add_parser("experiment", help="memory-experiment Monte Carlo")
    _common(exp)
    _scheme_args(exp)
    exp.add_argument("--distance", type=int, required=True)
    exp.add_argument("--rounds", type=int, default=None,
                     help="detector rounds (default: distance)")
    exp.add_argument("--p", type=float, default=1e-3)
    exp.add_argument("--scale-c", type=int, default=10)
    exp.add_argument("--shots", type=int, required=True)
    exp.add_argument("--per-shot", action="store_true",
                     help="embed per-shot records in the report")

    scan = sp.add_parser("wmax-scan", help="minimum-W_max scaling scan")
    _common(scan)
    scan.add_argument("--distances", default="3,5,7",
                      help="comma-separated code distances")
    scan.add_argument("--p", type=float, default=1e-3)
    scan.add_argument("--scale-c", type=int, default=10)
    scan.add_argument("--shots-per-d", type=int, required=True)
    scan.add_argument("--size-cap", type=int, default=30)
    scan.add_argument("--min-samples", type=int, default=10)

    win = sp.add_parser("window-run", help="streaming sliding-window decode")
    _common(win)
    _scheme_args(win)
    win.add_argument("--distance", type=int, required=True)
    win.add_argument("--p", type=float, default=1e-3)
    win.add_argument("--scale-c", type=int, default=10)
    win.add_argument("--n-com", type=int, required=True)
    win.add_argument("--n-buf", type=int, default=None)
    win.add_argument("--events", required=True,
                     help="round stream file, '-' for stdin")

    tim = sp.add_parser("timing", help="throughput / reaction-time calculators")
    _common(tim)
    tim.add_argument("--d", type=int, required=True)
    tim.add_argument("--tau-sg", type=float, required=True)
    tim.add_argument("--tau-l", type=float, default=0.0)
    tim.add_argument("--tw", type=float, required=True)
    tim.add_argument("--n-com", type=int, default=None)

    ben = sp.add_parser("bench", help="microbenchmarks")
    _common(ben)
    ben.add_argument("--distance", type=int, default=5)

    st = sp.add_parser("selftest", help="oracle-equivalence suite")
    _common(st)
    st.add_argument("--trials", type=int, default=150)
    return ap


def _cmd_precompute(args) -> int:
    if args.graph_in:
        with open(args.graph_in) as f:
            graph = parse_graph(f.read())
    else:
        if args.distance is None or args.rounds is None:
            raise _UsageError(
                "precompute needs --graph-in or --distance/--rounds"
            )
        graph = build_rotated_memory_graph(
            args.distance, args.rounds, args.p, args.scale_c
        )
    if args.graph_out:
        with open(args.graph_out, "w") as f:
            f.write(serialize_graph(graph))
    table = precompute_tables(graph)
    write_table(table, args.table_out)
    _emit(
        args,
        report_line(
            {
                "graph_hash": table.source_graph_hash,
                "num_detectors": table.num_detectors,
                "num_vertices": len(graph.vertices),
                "num_edges": len(graph.edges),
                "table_file": args.table_out,
            }
        ),
    )
    return 0


def report_line(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True) + "\n"


def _cmd_table_inspect(args) -> int:
    table = read_table(args.table_file)
    _emit(args, table_to_json(table) + "\n")
    return 0


def _cmd_decode(args) -> int:
    with open(args.graph) as f:
        graph = parse_graph(f.read())
    table = read_table(args.table)
    with open(args.events) as f:
        events = [int(tok) for tok in f.read().split()]
    t0 = time.perf_counter()
    pg = build_path_graph(table, events, graph_hash(graph))
    res_decode = decode(pg, _make_scheme(args, args.seed))
    rec = matching_to_recovery(pg, res_decode.matching.pairs, table, graph)
    elapsed = time.perf_counter() - t0
    doc = res_decode.to_record()
    doc["matching_vertices"] = {
        "actives": list(pg.actives),
        "mirrors": list(pg.mirrors),
    }
    doc["corrected_edges"] = sorted(rec.corrected_edges)
    doc["logical_flip_correction"] = rec.logical_flip_correction
    doc["timings"] = {"decode_seconds": elapsed}
    _emit(args, report_line(doc))
    return 0


def _cmd_experiment(args) -> int:
    rounds = args.rounds if args.rounds is not None else args.distance
    res = run_memory_experiment(
        distance=args.distance,
        rounds=rounds,
        p=args.p,
        shots=args.shots,
        scheme=_make_scheme(args, args.seed),
        master_seed=args.seed,
        scale_c=args.scale_c,
        threads=args.threads,
    )
    if args.format == "csv":
        _emit(args, experiment_to_csv(res))
    else:
        _emit(args, report_to_json(experiment_report(res, args.per_shot)))
    return 0


def _cmd_wmax_scan(args) -> int:
    d_list = [int(tok) for tok in args.distances.split(",") if tok]
    res = run_wmax_scan(
        d_list,
        p=args.p,
        shots_per_d=args.shots_per_d,
        master_seed=args.seed,
        size_cap=args.size_cap,
        scale_c=args.scale_c,
        min_samples=args.min_samples,
        threads=args.threads,
    )
    if args.format == "csv":
        _emit(args, scan_to_csv(res))
    else:
        _emit(args, report_to_json(scan_report(res)))
    return 0


def _cmd_window_run(args) -> int:
    if args.events == "-":
        lines = sys.stdin.readlines()
    else:
        with open(args.events) as f:
            lines = f.readlines()
    rounds = parse_round_stream(lines)
    cfg = WindowConfig(args.distance, args.n_com, args.n_buf)
    result = sliding_window_decode(
        args.distance,
        args.p,
        args.scale_c,
        rounds,
        cfg,
        _make_scheme(args, args.seed),
        master_seed=args.seed,
    )
    out = [w.to_record() for w in result.windows]
    doc = {
        "windows": out,
        "logical_flip_correction": result.logical_flip_correction,
    }
    _emit(args, report_line(doc))
    return 0


def _cmd_timing(args) -> int:
    tm = TimingModel(tau_sg=args.tau_sg, tau_l=args.tau_l, t_w=args.tw)
    doc = {
        "reaction_time": reaction_time(tm, args.d),
        "reaction_time_parallel": reaction_time_parallel(tm, args.d),
    }
    if args.n_com is not None:
        doc["throughput_ok"] = throughput_ok(
            tm, WindowConfig(args.d, args.n_com)
        )
    _emit(args, report_line(doc))
    return 0


def _cmd_bench(args) -> int:
    _emit(args, json.dumps(bench_mod.run_all(args.distance), indent=1) + "\n")
    return 0


def _cmd_selftest(args) -> int:
    from . import selftest

    failures = selftest.run(trials=args.trials, verbose=True)
    if failures:
        sys.stderr.write(f"selftest: {failures} mismatch(es)\n")
        return 2
    _emit(args, report_line({"selftest": "ok"}))
    return 0


_DISPATCH = {
    "precompute": _cmd_precompute,
    "decode": _cmd_decode,
    "experiment": _cmd_experiment,
    "wmax-scan": _cmd_wmax_scan,
    "window-run": _cmd_window_run,
    "timing": _cmd_timing,
    "bench": _cmd_bench,
    "selftest": _cmd_selftest,
}


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return 1
    try:
        if args.command == "table":
            return _cmd_table_inspect(args)
        return _DISPATCH[args.command](args)
    except _UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return 1
    except Exception as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


def main(argv=None) -> int:
    return cli_main(argv)


if __name__ == "__main__":
    sys.exit(main())
