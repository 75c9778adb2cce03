"""Command-line interface.

Exit codes: 0 success (or the checked claim holds), 1 a checked claim is
violated, 2 usage or input error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import os
import sys
import time
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .distributions import (
    EntropyOrder,
    JointDistribution,
    cond_min_entropy_avg,
    cond_min_entropy_worst,
    renyi_entropy,
    smooth_entropy,
)
from .errors import NumericError
from .extreme import gamma_curve, solve_extreme
from .fooling import FoolingSpec, SeparationSpec, build_fooler, run_conditional_separation
from .io import encode, load_any, load_distribution, load_joint, read_json, save, write_json
from .leakage import LeakageInstance, verify_chain_rule
from .metric import (
    metric_entropy_decide,
    metric_entropy_search,
    min_metric_conditional_entropy,
    relaxed_metric_entropy,
)
from .oracle import (
    RealDistinguisher,
    bruteforce_metric,
    hill_entropy_unbounded,
    metric_equals_hill_check,
)
from .randomized import make_rng, simulate_randomized

EXIT_OK, EXIT_VIOLATED, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
THREADS_ENV = "COMPENTROPY_THREADS"


class UsageError(Exception):
    pass


def _order(text: str) -> EntropyOrder:
    try:
        return EntropyOrder.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _common(p: argparse.ArgumentParser, order_default: str = "shannon") -> None:
    p.add_argument("--input", help="distribution or joint distribution JSON file")
    p.add_argument("--order", type=_order, default=_order(order_default),
                   help="shannon | min | alpha=<v> (default %(default)s)")
    p.add_argument("--k", type=float, help="target entropy in bits")
    p.add_argument("--epsilon", type=float, default=0.0, help="distinguishing advantage")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--out", help="write the JSON report here")
    p.add_argument("--format", choices=("json", "table"), default="table")
    p.add_argument("--threads", type=int, default=int(os.environ.get(THREADS_ENV, "1")),
                   help=f"worker cap (default from ${THREADS_ENV}, else 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="compentropy", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("entropy", help="Rényi / smooth / conditional min-entropy of a file")
    _common(p)

    p = sub.add_parser("extreme", help="solve the extreme-distribution system")
    _common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=float, help="size of the distinguisher")
    p.add_argument("--d-max", type=int, help="print gamma(d) for d = 1..d_max instead")

    p = sub.add_parser("metric", help="metric entropy against all boolean distinguishers")
    _common(p)
    p.add_argument("--method", choices=("bisect", "invert"), default="bisect")

    p = sub.add_parser("oracle", help="brute-force and HILL cross-checks")
    _common(p)
    p.add_argument("--mode", choices=("bruteforce", "hill", "check", "all"), default="all")

    p = sub.add_parser("construct-fooling", help="write a fooling distribution")
    _common(p, order_default="alpha=2")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--c", type=float, default=1.0 / 8.0, help="Shannon construction needs k <= c*n")

    p = sub.add_parser("simulate-separation", help="hard-subset separation experiment")
    _common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--C", type=int, required=True)
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--delta", type=float, help="score threshold; overrides --epsilon")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--family-size", type=int, default=10_000)

    p = sub.add_parser("chain-rule", help="check the leakage chain rule on a joint file")
    _common(p)
    p.add_argument("--m2", type=int, help="trailing bits of Z treated as the leak (default: all of Z)")

    p = sub.add_parser("simulate-distinguisher", help="randomized boolean simulation of a [0,1] test")
    _common(p)
    p.add_argument("--ell", type=int, default=10)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--n", type=int, help="draw random values on {0,1}^n when --input is absent")
    return parser


def _need(args, name: str):
    value = getattr(args, name)
    if value is None:
        raise UsageError(f"--{name.replace('_', '-')} is required for '{args.command}'")
    return value


# ------------------------------------------------------------------ commands


def cmd_entropy(args):
    obj = load_any(_need(args, "input"))
    if isinstance(obj, JointDistribution):
        worst = cond_min_entropy_worst(obj)
        return worst, {"worst_case": worst, "average": cond_min_entropy_avg(obj)}, EXIT_OK
    value = renyi_entropy(obj, args.order)
    details = {}
    if args.epsilon > 0:
        details["smooth"] = smooth_entropy(obj, args.order, args.epsilon)
    return value, details, EXIT_OK


def cmd_extreme(args):
    k = _need(args, "k")
    if args.d_max is not None:
        curve = gamma_curve(args.order, args.n, k, args.d_max)
        return None, {"gamma": [float(v) for v in curve]}, EXIT_OK
    sol = solve_extreme(args.order, args.n, k, _need(args, "d"))
    details = sol.as_dict()
    details.update(mass_residual=sol.mass_residual(), entropy_residual=sol.entropy_residual())
    return sol.gamma, details, EXIT_OK


def cmd_metric(args):
    obj = load_any(_need(args, "input"))
    if isinstance(obj, JointDistribution):
        details = {
            "relaxed": relaxed_metric_entropy(obj, args.epsilon),
            "worst_case": min_metric_conditional_entropy(obj, args.epsilon, average=False),
            "average": min_metric_conditional_entropy(obj, args.epsilon, average=True),
        }
        return details["relaxed"], details, EXIT_OK
    if args.k is not None:
        dec = metric_entropy_decide(obj, args.order, args.k, args.epsilon)
        details = {"holds": dec.holds, "margin": dec.margin}
        if not dec.holds:
            details["witness_d"] = dec.witness_d
            if dec.distinguisher is not None and dec.distinguisher.size <= 64:
                details["distinguisher"] = [int(v) for v in dec.distinguisher]
        return dec.holds, details, EXIT_OK if dec.holds else EXIT_VIOLATED
    k = metric_entropy_search(obj, args.order, args.epsilon, method=args.method)
    return k, {"order": str(args.order), "epsilon": args.epsilon}, EXIT_OK


def cmd_oracle(args):
    X = load_distribution(_need(args, "input"))
    details, code, primary = {}, EXIT_OK, None
    if args.mode in ("bruteforce", "all") and X.n <= 4:
        details["bruteforce_metric"] = primary = bruteforce_metric(X, args.order, args.epsilon)
    if args.mode in ("hill", "all"):
        details["hill_unbounded"] = hill_entropy_unbounded(X, args.order, args.epsilon)
        primary = details["hill_unbounded"] if primary is None else primary
    if args.mode in ("check", "all") and X.n <= 6:
        chk = metric_equals_hill_check(X, args.order, args.epsilon)
        details.update(real_metric=chk.metric, metric_equals_hill=chk.holds)
        code = EXIT_OK if chk.holds else EXIT_VIOLATED
    if args.mode == "bruteforce" and X.n > 4:
        raise UsageError("brute-force enumeration needs n <= 4")
    return primary, details, code


def cmd_construct(args):
    spec = FoolingSpec(args.order, args.n, _need(args, "k"), c=args.c)
    X = build_fooler(spec)
    if args.out:
        save(X, args.out)
    dec = metric_entropy_decide(X, spec.order, spec.k, 0.0)
    details = {
        "order": str(spec.order),
        "n": spec.n,
        "k": spec.k,
        "entropy": renyi_entropy(X, spec.order),
        "metric_decide_at_k": dec.holds,
        "support_size": int(np.count_nonzero(X.masses())),
    }
    return details["entropy"], details, EXIT_OK if dec.holds else EXIT_VIOLATED


def cmd_separation(args):
    kw = dict(k=int(_need(args, "k")), C=args.C, n=args.n, m=args.m, trials=args.trials,
              family_size=args.family_size, seed=args.seed)
    spec = SeparationSpec.from_delta(args.delta, **kw) if args.delta is not None else SeparationSpec(
        epsilon=args.epsilon, **kw)
    report = run_conditional_separation(spec, threads=max(args.threads, 1))
    agg = report["aggregate"]
    code = EXIT_OK if agg["exact_holds"] == agg["trials"] else EXIT_VIOLATED
    return agg["empirical_holds"], report, code


def cmd_chain(args):
    J = load_joint(_need(args, "input"))
    m2 = J.m if args.m2 is None else args.m2
    inst = LeakageInstance.from_joint(J, m2, args.k, args.epsilon)
    report = verify_chain_rule(inst)
    return report["slack"], report, EXIT_OK if report["holds"] else EXIT_VIOLATED


def cmd_simulate_dist(args):
    if args.input:
        doc = read_json(args.input)
        if not isinstance(doc, dict) or "values" not in doc or "n" not in doc:
            raise UsageError("distinguisher file needs fields 'n' and 'values'")
        D = RealDistinguisher(int(doc["n"]), np.asarray(doc["values"], dtype=np.float64))
    else:
        n = _need(args, "n")
        D = RealDistinguisher(n, make_rng(np.random.SeedSequence(args.seed).spawn(1)[0]).random(1 << n))
    res = simulate_randomized(D, args.ell, seed=args.seed, samples=args.samples)
    details = res.as_dict()
    return details["max_empirical_bias"], details, EXIT_OK


COMMANDS = {
    "entropy": cmd_entropy,
    "extreme": cmd_extreme,
    "metric": cmd_metric,
    "oracle": cmd_oracle,
    "construct-fooling": cmd_construct,
    "simulate-separation": cmd_separation,
    "chain-rule": cmd_chain,
    "simulate-distinguisher": cmd_simulate_dist,
}


def _timestamp() -> int:
    """Seconds since the epoch; ``SOURCE_DATE_EPOCH`` pins it for reproducible reports."""
    env = os.environ.get("SOURCE_DATE_EPOCH")
    return int(env) if env is not None else int(time.time())


def _config(args) -> dict:
    cfg = {}
    for key, value in sorted(vars(args).items()):
        cfg[key] = str(value) if isinstance(value, EntropyOrder) else value
    return cfg


def _render_table(primary, details) -> str:
    lines = []
    if primary is not None:
        lines.append(repr(primary) if isinstance(primary, float) else str(primary))
    for key, value in details.items():
        if isinstance(value, (list, dict)) and key in ("trials", "spec"):
            continue
        if isinstance(value, dict):
            for sub, v in value.items():
                lines.append(f"{key}.{sub}: {v}")
        else:
            lines.append(f"{key}: {value}")
    return "\n".join(lines)


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        primary, details, code = COMMANDS[args.command](args)
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    record = {
        "command": argv,
        "config": _config(args),
        "seed": args.seed,
        "timestamp": _timestamp(),
        "version": __version__,
        "result": {"value": primary, **details},
        "exit_code": code,
    }
    if args.out and args.command != "construct-fooling":
        write_json(record, args.out)
    if args.format == "json":
        print(encode(record))
    else:
        print(_render_table(primary, details))
    return code


if __name__ == "__main__":
    sys.exit(main())
