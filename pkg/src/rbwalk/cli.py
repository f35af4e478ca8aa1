"""Command-line front end: ``rbwalk {build,simulate,verify,entropy}``.

Exit codes: 0 success, 1 a certification failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import datetime
import math
import sys

import numpy as np

from . import __version__
from .chain import (
    EntropyConfig,
    build_discrete_rb,
    build_rb_generator,
    differential_entropy_rate,
    discrete_entropy_rate,
    result_bundle,
    scale_generator,
)
from .errors import ConvergenceError, GraphParseError, GraphValidationError
from .graph import GraphMode, load_edge_list, require_valid
from .jumps import embed, sample_ensemble, transition_kernel
from .serialize import dumps, write_json, write_jsonl
from .spectral import perron
from .suite import DELTAS, SuiteOptions, delta_table, run_suite

EXIT_OK, EXIT_FAILED, EXIT_INPUT = 0, 1, 2


class UsageError(ValueError):
    pass


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return value


def _positive_float(text):
    value = float(text)
    if not value > 0 or math.isinf(value):
        raise argparse.ArgumentTypeError(f"must be a positive number, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--graph", required=True, help="edge-list file ('src dst' per line, 0-based)")
    common.add_argument("--eta", type=_positive_float, default=1.0)
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--tol", type=_positive_float, default=1e-12, help="eigen-residual tolerance")
    common.add_argument("--out", default=None, help="output file")

    parser = argparse.ArgumentParser(prog="rbwalk", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("build", parents=[common], help="construct the chain and generator")

    sim = sub.add_parser("simulate", parents=[common], help="sample jump-process trajectories")
    sim.add_argument("--tf", type=_positive_float, default=1.0)
    sim.add_argument("--trajectories", type=_positive_int, default=100_000)
    sim.add_argument("--from", dest="start", type=int, default=0)
    sim.add_argument("--report", default=None, help="write the summary document here")

    ver = sub.add_parser("verify", parents=[common], help="run all certifications")
    ver.add_argument("--tf", type=_positive_float, default=1.0)
    ver.add_argument("--trajectories", type=_positive_int, default=100_000)
    ver.add_argument("--trials", type=_positive_int, default=1000)
    ver.add_argument("--from", dest="start", type=int, default=0)
    ver.add_argument("--to", dest="end", type=int, default=0)
    ver.add_argument("--steps", type=_positive_int, default=2)

    ent = sub.add_parser("entropy", parents=[common], help="entropy rates and the small-delta table")
    ent.add_argument("--delta", type=_positive_float, action="append", default=None,
                     help="extra sampling step (repeatable)")
    return parser


def _load(path, tol):
    with open(path, "rb") as fh:
        g = load_edge_list(fh.read())
    require_valid(g, GraphMode.CONTINUOUS_TIME)
    return g, perron(g, tol=tol)


def _document(command, args, payload):
    config = {k: v for k, v in sorted(vars(args).items()) if k != "command"}
    return {"command": command, "config": config,
            "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(), **payload}


def _check_node(g, node, flag):
    if not 0 <= node < g.n:
        raise UsageError(f"{flag} {node} is not a node (graph has {g.n} nodes)")


def cmd_build(args, out=None):
    out = out or sys.stdout
    g, p = _load(args.graph, args.tol)
    cfg = EntropyConfig(args.eta)
    bundle = result_bundle(p, build_discrete_rb(p, g), build_rb_generator(p, g), cfg)
    if args.out:
        write_json(args.out, _document("build", args, {"result": bundle}))
    print(f"nodes            {g.n}", file=out)
    print(f"lambda           {bundle['lambda']:.12g}", file=out)
    print(f"H (nats/step)    {bundle['H_discrete']:.12g}", file=out)
    print(f"h_eta (eta={cfg.eta:g})  {bundle['h_eta']:.12g}", file=out)
    print(f"residual         {bundle['residual']:.3e}", file=out)
    return EXIT_OK


def cmd_simulate(args, out=None):
    out = out or sys.stdout
    g, p = _load(args.graph, args.tol)
    _check_node(g, args.start, "--from")
    q = scale_generator(build_rb_generator(p, g), EntropyConfig(args.eta))
    ens = sample_ensemble(embed(q), args.start, args.tf, count=args.trajectories, seed=args.seed)
    if args.out:
        write_jsonl(args.out, ens.records())

    rate = float(-q.Q[0, 0])
    expected = rate * args.tf
    sigma = math.sqrt(expected / len(ens))
    mean = float(ens.n_jumps.mean())
    hist = np.bincount(ens.final_states, minlength=g.n) / len(ens)
    row = transition_kernel(q, args.tf)[args.start]
    summary = {
        "trajectories": len(ens),
        "jump_count_mean": mean,
        "jump_count_expected": expected,
        "jump_count_sigma": sigma,
        "within_3_sigma": abs(mean - expected) <= 3 * sigma,
        "end_state_empirical": hist.tolist(),
        "end_state_exact": row.tolist(),
    }
    if args.report:
        write_json(args.report, _document("simulate", args, {"summary": summary}))
    print(f"trajectories     {len(ens)}", file=out)
    print(f"mean jumps       {mean:.6f}  (expected {expected:.6f} +- {3 * sigma:.6f} at 3 sigma)", file=out)
    print("end state        empirical   exact", file=out)
    for k in range(g.n):
        print(f"  {k:<14d} {hist[k]:.6f}    {row[k]:.6f}", file=out)
    return EXIT_OK


def cmd_verify(args, out=None, generator_hook=None):
    out = out or sys.stdout
    g, _ = _load(args.graph, args.tol)
    _check_node(g, args.start, "--from")
    _check_node(g, args.end, "--to")
    opts = SuiteOptions(eta=args.eta, trials=args.trials, seed=args.seed, i=args.start, j=args.end,
                        steps=args.steps, t_f=args.tf, trajectories=args.trajectories, tol=args.tol)
    checks = run_suite(g, opts, generator_hook=generator_hook)
    passed = all(c.passed for c in checks)
    doc = _document("verify", args, {"passed": passed, "checks": [c.to_dict() for c in checks]})
    if args.out:
        write_json(args.out, doc)
    for c in checks:
        observed = c.observed if not isinstance(c.observed, float) else f"{c.observed:.6g}"
        print(f"[{'PASS' if c.passed else 'FAIL'}] {c.name:<28s} observed={observed} tol={c.tolerance}",
              file=out)
    if not passed:
        failing = [c.to_dict() for c in checks if not c.passed]
        print(dumps({"failing": failing}), file=sys.stderr)
    return EXIT_OK if passed else EXIT_FAILED


def cmd_entropy(args, out=None):
    out = out or sys.stdout
    g, p = _load(args.graph, args.tol)
    cfg = EntropyConfig(args.eta)
    q = build_rb_generator(p, g)
    H = discrete_entropy_rate(build_discrete_rb(p, g))
    h = differential_entropy_rate(scale_generator(q, cfg), cfg)
    deltas = sorted(set(DELTAS) | set(args.delta or ()), reverse=True)
    table = delta_table(q, deltas)
    if args.out:
        write_json(args.out, _document("entropy", args, {
            "lambda": p.lam, "H_discrete": H, "eta": cfg.eta, "h_eta": h, "delta_table": table}))
    print(f"H(P)  = {H:.12g}  (log lambda = {math.log(p.lam):.12g})", file=out)
    print(f"h_eta = {h:.12g}  (eta = {cfg.eta:g}, ceiling {math.exp(cfg.eta - 1) * p.lam:.12g})", file=out)
    print(f"{'delta':>10s} {'exact':>14s} {'expansion':>14s} {'ratio':>10s}", file=out)
    for row in table:
        print(f"{row['delta']:>10.0e} {row['exact']:>14.8e} {row['expansion']:>14.8e} {row['ratio']:>10.6f}",
              file=out)
    return EXIT_OK


COMMANDS = {"build": cmd_build, "simulate": cmd_simulate, "verify": cmd_verify, "entropy": cmd_entropy}


def main(argv=None, generator_hook=None) -> int:
    """CLI entry point. ``generator_hook`` is a test seam for ``verify``."""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify":
            return cmd_verify(args, generator_hook=generator_hook)
        return COMMANDS[args.command](args)
    except GraphValidationError as exc:
        print(f"rbwalk: invalid graph: {exc}", file=sys.stderr)
        print(dumps(exc.report.to_dict()), file=sys.stderr)
        return EXIT_INPUT
    except (GraphParseError, UsageError, OSError, ConvergenceError) as exc:
        print(f"rbwalk: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
