"""Command-line front end.

    ringcc run STREAM_FILE [options]     drive a ring over a stream file
    ringcc gen [options]                 write a synthetic stream file
    ringcc reference STREAM_FILE -s N    multipass reference labels (debug)
    ringcc experiment {1,2,3} [options]  desk-scale experiment harnesses

Query results print as "<tick> OUT q<id> <result>"; other boundary events as
"<tick> EVT ...". Exit status 2 means the run died with storage exhausted;
the failing tick goes to stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

from .experiments import run_experiment_1, run_experiment_2, run_experiment_3
from .model import Arrival
from .multipass import multipass_labels
from .pipeline import run_pipelined
from .ring import Ring, RingConfig, SystemFailed
from .streams import (
    ParseError,
    gen_repeat_block,
    gen_rmat,
    gen_uniform,
    parse_stream_file,
    render_items,
)

METRICS_HEADER = ["tick", "mode", "stored_total", "tree_total", "nontree_total",
                  "untested_total", "unresolved_total", "builder_index",
                  "loader_index", "free_space"]


def _add_ring_options(sub):
    sub.add_argument("--processors", "-p", type=int, default=10)
    sub.add_argument("--capacity", "-s", type=int, default=1000,
                     help="stored edges per processor")
    sub.add_argument("--bundle", "-k", type=int, default=5,
                     help="slots per bundle (1 primary + k-1 payload)")
    sub.add_argument("--engine", choices=("lockstep", "pipelined"),
                     default="lockstep")
    sub.add_argument("--validate", action="store_true",
                     help="audit invariants every tick")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--metrics", metavar="CSV",
                     help="write per-tick storage metrics")
    sub.add_argument("--reservoir", type=int, default=100,
                     help="sample size for the automatic aging policy")
    sub.add_argument("--auto-age-c", type=float, default=None,
                     help="arm automatic deletion at this survivor fraction")
    sub.add_argument("--auto-age-margin", type=float, default=1.25)
    sub.add_argument("--quiet", action="store_true",
                     help="suppress transcript output")


def _config_from(args):
    return RingConfig(
        p=args.processors, s=args.capacity, k=args.bundle,
        validate=args.validate, seed=args.seed, reservoir=args.reservoir,
        auto_age_c=args.auto_age_c, auto_age_margin=args.auto_age_margin,
        metrics=bool(args.metrics),
    )


def cmd_run(args):
    try:
        items = parse_stream_file(args.stream)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 1
    config = _config_from(args)
    failure = None
    ring = None
    if args.engine == "pipelined":
        try:
            transcript = run_pipelined(config, items)
        except SystemFailed as exc:
            failure = exc
            transcript = None
    else:
        ring = Ring(config)
        try:
            ring.run_stream(items)
        except SystemFailed as exc:
            failure = exc
        transcript = ring.transcript
    if transcript is not None and not args.quiet:
        for line in transcript.lines():
            if " IN " not in line:
                print(line)
    if ring is not None and args.metrics:
        with open(args.metrics, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(METRICS_HEADER)
            writer.writerows(ring.metrics)
    if ring is not None and args.validate and ring.violations:
        for v in ring.violations[:50]:
            print(f"violation tick={v.tick} {v.kind} p{v.index}: {v.detail}",
                  file=sys.stderr)
        return 3
    if failure is not None:
        print(f"FAILED at tick {failure.tick}: {failure.reason}", file=sys.stderr)
        return 2
    return 0


def cmd_gen(args):
    if args.kind == "uniform":
        edges = gen_uniform(args.count, args.u_target, args.seed)
    elif args.kind == "repeat":
        edges = gen_repeat_block(args.count, args.block, args.seed)
    else:
        edges = gen_rmat(args.count, args.scale, seed=args.seed)
    items = [Arrival(u, v) for u, v in edges]
    text = render_items(items)
    if args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w") as fh:
            fh.write(text)
    return 0


def cmd_reference(args):
    try:
        items = parse_stream_file(args.stream)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 1
    arrivals = [(it.u, it.v) for it in items if isinstance(it, Arrival)]
    labels = multipass_labels(args.capacity, arrivals=arrivals)
    for v in sorted(labels):
        print(v, labels[v])
    return 0


def cmd_experiment(args):
    if args.which == 1:
        report = run_experiment_1(kind=args.kind, n=args.count,
                                  p=args.processors, s=args.capacity,
                                  k=args.bundle, seed=args.seed)
    elif args.which == 2:
        report = {"cells": []}
        for c in args.survivor:
            for d in args.downtime:
                cell = run_experiment_2(c=c, downtime_budget=d, u=args.u,
                                        p=args.processors, s=args.capacity,
                                        seed=args.seed, validate=args.validate)
                report["cells"].append(cell)
    else:
        report = run_experiment_3(n=args.count, target_c=args.survivor[0],
                                  p=args.processors, s=args.capacity,
                                  k=args.bundle, seed=args.seed,
                                  validate=args.validate)
    json.dump(report, sys.stdout, indent=2, default=str)
    print()
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="ringcc", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    subs = parser.add_subparsers(dest="command", required=True)

    run_p = subs.add_parser("run", help="drive a ring over a stream file")
    run_p.add_argument("stream")
    _add_ring_options(run_p)
    run_p.set_defaults(fn=cmd_run)

    gen_p = subs.add_parser("gen", help="generate a synthetic stream")
    gen_p.add_argument("--kind", choices=("uniform", "repeat", "rmat"),
                       default="uniform")
    gen_p.add_argument("--count", "-n", type=int, default=10000)
    gen_p.add_argument("--u-target", type=float, default=0.67,
                       help="unique fraction for the uniform kind")
    gen_p.add_argument("--block", type=int, default=100,
                       help="contiguous observations per edge (repeat kind)")
    gen_p.add_argument("--scale", type=int, default=12,
                       help="log2 vertex count (rmat kind)")
    gen_p.add_argument("--seed", type=int, default=0)
    gen_p.add_argument("--output", "-o", default="-")
    gen_p.set_defaults(fn=cmd_gen)

    ref_p = subs.add_parser("reference", help="multipass reference labels")
    ref_p.add_argument("stream")
    ref_p.add_argument("--capacity", "-s", type=int, required=True)
    ref_p.set_defaults(fn=cmd_reference)

    exp_p = subs.add_parser("experiment", help="run an experiment harness")
    exp_p.add_argument("which", type=int, choices=(1, 2, 3))
    exp_p.add_argument("--kind", choices=("uniform", "repeat", "rmat"),
                       default="uniform")
    exp_p.add_argument("--count", "-n", type=int, default=100_000)
    exp_p.add_argument("--processors", "-p", type=int, default=10)
    exp_p.add_argument("--capacity", "-s", type=int, default=2000)
    exp_p.add_argument("--bundle", "-k", type=int, default=5)
    exp_p.add_argument("--survivor", type=float, nargs="+", default=[0.5],
                       help="survivor fraction(s) c")
    exp_p.add_argument("--downtime", type=float, nargs="+", default=[0.5],
                       help="downtime budget(s) for experiment 2")
    exp_p.add_argument("--u", type=float, default=1.0)
    exp_p.add_argument("--seed", type=int, default=0)
    exp_p.add_argument("--validate", action="store_true")
    exp_p.set_defaults(fn=cmd_experiment)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
