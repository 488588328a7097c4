"""``redq`` command-line interface.

Exit codes: 0 success, 2 config error, 3 runtime error, 4 a replay found a
dominance violation.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .config import load_config
from .coupling import (
    ARRIVAL,
    check_general_k,
    check_k1,
    random_sequences,
    read_events,
    replay_general_k,
    replay_k1,
)
from .distributed import DISTRIBUTED_TRACE_COLUMNS
from .central import TRACE_COLUMNS
from .distributions import classify_everywhere, min_of_n_mean, parse_distribution
from .errors import ConfigError, InvalidRequestDegree, ParseError
from .experiments import PRESETS, run_preset
from .metrics import PolicyRow, compare_policies, regime_label, summarize, write_results_csv
from .simulate import run, run_replications
from .workload import Poisson

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_VIOLATION = 0, 2, 3, 4


def parse_int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ParseError(f"expected comma-separated integers, got {text!r}", key="--degrees") from None


def parse_range(text: str) -> list[float]:
    """``lo:hi:step`` inclusive of ``hi``, or a comma list."""
    try:
        if ":" not in text:
            return [float(x) for x in text.split(",") if x.strip()]
        lo, hi, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise ParseError(f"expected lo:hi:step or a comma list, got {text!r}", key="--lambdas") from None
    if step <= 0 or hi < lo:
        raise ParseError("need step > 0 and hi >= lo", key="--lambdas")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + i * step, 12) for i in range(count)]


def _seed_override(args):
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("REDQ_SEED")
    if env is None:
        return None
    try:
        return int(env)
    except ValueError:
        raise ConfigError(f"REDQ_SEED must be an integer, got {env!r}") from None


def _load(args):
    config = load_config(args.config)
    seed = _seed_override(args)
    return config if seed is None else config.with_(seed=seed)


def _open_out(args):
    return open(args.out, "w", newline="") if getattr(args, "out", None) else sys.stdout


def cmd_validate(args):
    config = _load(args)
    print(json.dumps(config.to_dict(), indent=2, sort_keys=True))
    return EXIT_OK


def cmd_run(args):
    config = _load(args)
    results = run_replications(config)
    row = PolicyRow(
        ";".join(map(str, config.request_degree.values())),
        regime_label(config),
        config.arrival_rate,
        summarize(results),
    )
    out = _open_out(args)
    try:
        write_results_csv([row], config.seed, out, ["config: " + config.to_json(sort_keys=True)])
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_sweep(args):
    config = _load(args)
    degrees = parse_int_list(args.degrees) if args.degrees else list(config.request_degree.values())
    points = [config]
    if args.lambdas:
        points = [config.with_(arrivals=Poisson(lam), regime=None) for lam in parse_range(args.lambdas)]
    rows = []
    for cfg in points:
        rows.extend(compare_policies(cfg, degrees))
    out = _open_out(args)
    try:
        write_results_csv(rows, config.seed, out, ["config: " + config.to_json(sort_keys=True)])
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_trace(args):
    config = _load(args)
    result = run(config, 0, trace=True, max_events=args.events)
    cols = DISTRIBUTED_TRACE_COLUMNS if config.buffer_mode == "distributed" else TRACE_COLUMNS
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(cols)
    for row in result.trace:
        w.writerow(["" if v is None else repr(v) if isinstance(v, float) else v for v in row])
    return EXIT_OK


def cmd_classify(args):
    dist = parse_distribution(args.spec)
    report = classify_everywhere(dist, tolerance=args.tolerance)
    print(f"distribution: {dist.spec()}")
    print(f"verdict: {report.verdict}")
    print(f"grid points checked: {report.checked_points} (grid-based check, not a proof)")
    w = report.worst_violation
    if w is not None:
        a, b, lhs, rhs = w
        print(f"worst violation: a={a:g} b={b:g} P(X>a+b|X>b)={lhs:.6g} P(X>a)={rhs:.6g}")
    for n in (2, 3, 4, 8):
        print(f"E[min of {n}] = {min_of_n_mean(dist, n):.9g}  (mean/{n} = {dist.mean() / n:.9g})")
    return EXIT_OK


def cmd_replay(args):
    n, k, r = args.n, args.k, args.r
    r2 = args.r2 if args.r2 is not None else n
    if args.mode == "k1" and k != 1:
        raise ParseError("mode k1 requires --k 1", key="--k")
    if args.mode == "k1":
        label = f"k1 n={n} r1={r} r2={r2}"
        replay = lambda seq: replay_k1(n, r, r2, seq)
    else:
        label = f"generalk n={n} k={k} r_alt={r} vs r={n}"
        replay = lambda seq: replay_general_k(n, k, r, seq)
    if args.file:
        seqs = [read_events(f, n) for f in args.file]
        first = np.array([-1 if (t := replay(s)).holds else t.first_violation for s in seqs])
        names = list(args.file)
    else:
        rng = np.random.default_rng(_seed_override(args) or 0)
        arr = random_sequences(n, args.sequences, args.len, rng)
        seqs = arr
        first = check_k1(n, r, r2, arr) if args.mode == "k1" else check_general_k(n, k, r, arr)
        names = None
    bad = np.flatnonzero(first >= 0)
    print(f"{label}: {len(seqs)} sequences, {len(bad)} violating")
    for i in bad[: args.show]:
        where = names[i] if names else f"sequence {i}"
        print(f"violation: {where} first index z={int(first[i])}")
        if args.verbose:
            seq = list(seqs[i][: first[i] + 1])
            tr = replay(seq)
            print("  events: " + " ".join("A" if e == ARRIVAL else f"T{e}" for e in seq))
            print(f"  b1: {tr.b1}\n  b2: {tr.b2}")
    return EXIT_VIOLATION if len(bad) else EXIT_OK


def cmd_reproduce(args):
    seed = _seed_override(args)
    out = _open_out(args)
    try:
        run_preset(
            args.preset, seed=0 if seed is None else seed, out=out,
            replications=args.replications, batches=args.batches, backlog=args.backlog,
        )
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="redq", description="Redundant-request queueing simulator.")
    p.add_argument("--version", action="version", version=f"redq {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def with_config(name, fn, help):
        sp = sub.add_parser(name, help=help)
        sp.add_argument("config")
        sp.add_argument("--seed", type=int)
        sp.set_defaults(func=fn)
        return sp

    sp = with_config("run", cmd_run, "simulate one config, print a results row")
    sp.add_argument("--out")
    sp = with_config("sweep", cmd_sweep, "sweep request degrees and arrival rates")
    sp.add_argument("--degrees")
    sp.add_argument("--lambdas")
    sp.add_argument("--out")
    sp = with_config("trace", cmd_trace, "dump the first events as CSV")
    sp.add_argument("--events", type=int, default=50)
    with_config("validate", cmd_validate, "load and echo a config")

    sp = sub.add_parser("classify", help="heavy/light-everywhere verdict for a distribution")
    sp.add_argument("spec")
    sp.add_argument("--tolerance", type=float, default=1e-9)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("replay", help="coupled dominance replay over event sequences")
    sp.add_argument("--mode", choices=("k1", "generalk"), required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--r", type=int, required=True)
    sp.add_argument("--r2", type=int, help="second degree for k1 mode (default n)")
    sp.add_argument("--sequences", type=int, default=10_000)
    sp.add_argument("--len", type=int, default=1000)
    sp.add_argument("--file", nargs="+", help="event files, one A or T<i> per line")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--show", type=int, default=5)
    sp.add_argument("-v", "--verbose", action="store_true")
    sp.set_defaults(func=cmd_replay)

    sp = sub.add_parser("reproduce", help="run a named experiment preset")
    sp.add_argument("preset", choices=sorted(PRESETS))
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out")
    sp.add_argument("--replications", type=int)
    sp.add_argument("--batches", type=int)
    sp.add_argument("--backlog", type=int)
    sp.set_defaults(func=cmd_reproduce)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, InvalidRequestDegree) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
