"""Command-line entry point: ``primeboost <subcommand> [--flags]``.

Data goes to ``--output`` (default stdout); diagnostics go to stderr. Exit
status is 0 on success, 1 on domain or capacity errors, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import sys
from fractions import Fraction

from .adaboost import run_adaboost
from .erm import erm_fit, make_sample
from .errors import CapacityError, DomainError
from .experiments import DEFAULT_CONFIG, ExperimentConfig, records_to_json, run_experiments, summarize, write_csv
from .hypotheses import divisor_rules, prime_rules, progression_rules
from .primes import build_prime_table, prime_count
from .shattering import (
    check_shatter,
    construction_certificate,
    certified_vc_progression,
    progression_vc_bounds,
    validate_certificate_prime_structure,
)


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _weight_list(text: str) -> list:
    parts = [t.strip() for t in text.split(",") if t.strip()]
    try:
        if any(c in t for t in parts for c in ".eE"):
            return [float(t) for t in parts]
        return [Fraction(t) for t in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated weights, got {text!r}")


def _json_default(obj):
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _emit(args, payload, rows=None, columns=None) -> None:
    """Write ``payload`` as JSON, or ``rows`` as CSV, to the chosen destination."""
    with contextlib.ExitStack() as stack:
        fh = sys.stdout if args.output in (None, "-") else stack.enter_context(open(args.output, "w", newline=""))
        if args.format == "json":
            json.dump(payload, fh, indent=2, default=_json_default)
            fh.write("\n")
        else:
            writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
            writer.writeheader()
            for r in rows:
                writer.writerow({k: (str(v) if isinstance(v, Fraction) else v) for k, v in r.items()})


def cmd_sieve(args) -> None:
    table = build_prime_table(args.limit)
    payload = {"limit": table.limit, "prime_count": prime_count(table, table.limit)}
    if args.list:
        payload["primes"] = table.primes.tolist()
        rows = [{"index": i + 1, "prime": p} for i, p in enumerate(payload["primes"])]
        _emit(args, payload, rows, ["index", "prime"])
    else:
        _emit(args, payload, [payload], ["limit", "prime_count"])


def cmd_shatter_construct(args) -> None:
    table = build_prime_table(max(args.limit, 64))
    cert = construction_certificate(args.ell, table)
    report = validate_certificate_prime_structure(cert, table) if cert else None
    payload = {
        "ell": args.ell,
        "candidate_set": [str(c) for c in cert.candidate_set],
        "certificate": cert.to_json(),
        "prime_structure": report and report.to_json(),
    }
    rows = [{"i": i + 1, "c_i": str(c)} for i, c in enumerate(cert.candidate_set)]
    _emit(args, payload, rows, ["i", "c_i"])


def cmd_shatter_check(args) -> None:
    if args.cls == "primes":
        table = build_prime_table(max(args.max_divisor, 2))
        hyps = prime_rules(table, args.max_divisor)
    elif args.cls == "divisors":
        hyps = divisor_rules(args.max_divisor)
    else:
        if args.k is None:
            raise DomainError("--class progression needs --k")
        hyps = progression_rules(args.k, range(2, args.max_divisor + 1))
    res = check_shatter(args.set, hyps)
    payload = res.to_json()
    rows = [{"dichotomy": k, "witness": v} for k, v in payload.get("witnesses", {}).items()]
    _emit(args, payload, rows, ["dichotomy", "witness"])


def cmd_vc_bounds(args) -> None:
    b = progression_vc_bounds(args.k)
    _emit(args, b.to_json(), [b.to_json()], ["lower", "upper", "eta", "lower_clamped"])


def cmd_vc_certify(args) -> None:
    table = build_prime_table(max(2 * args.domain_bound, 100))
    res = certified_vc_progression(args.k, args.domain_bound, table, args.prime_only, args.budget)
    payload = res.to_json()
    row = {k: payload[k] for k in ("k", "domain_bound", "prime_only", "dimension", "lower", "upper", "status")}
    _emit(args, payload, [row], list(row))


def cmd_erm(args) -> None:
    table = build_prime_table(max(args.limit, max(args.instances), 2))
    S = make_sample(args.instances, table, args.weights)
    res = erm_fit(S, prime_only=args.cls == "primes")
    payload = {"d_S": res.d, "coverage": res.coverage, "risk": res.risk, "composite_weight": res.composite_weight}
    _emit(args, payload, [payload], list(payload))


def cmd_boost(args) -> None:
    table = build_prime_table(max(args.limit, max(args.instances), 2))
    S = make_sample(args.instances, table)
    trace = run_adaboost(S, args.rounds, prime_only=args.cls == "primes")
    rows = [{"t": r.t, "d_t": r.d, "eps_t": r.eps, "W_t": r.W, "clamped": r.clamped} for r in trace.rounds]
    _emit(args, {"status": trace.status, "rounds": rows}, [dict(r, status=trace.status) for r in rows],
          ["t", "d_t", "eps_t", "W_t", "clamped", "status"])


def cmd_experiment(args) -> None:
    config = ExperimentConfig.load(args.config) if args.config else DEFAULT_CONFIG
    if args.seed is not None:
        config = ExperimentConfig(**{**config.__dict__, "seed": args.seed})
    which = ("erm", "boost") if args.which == "both" else (args.which,)
    table = build_prime_table(max(config.n_grid))
    records = run_experiments(config, table, workers=args.workers, experiments=which)
    if args.format == "csv":
        with contextlib.ExitStack() as stack:
            fh = sys.stdout if args.output in (None, "-") else stack.enter_context(open(args.output, "w", newline=""))
            write_csv(records, fh)
    else:
        _emit(args, {
            "config": config.to_json(),
            "summary": summarize(records, table),
            "records": records_to_json(records),
        })
    if args.summary:
        for row in summarize(records, table):
            print(json.dumps(row), file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="primeboost", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, default_format="json", **kw):
        p = sub.add_parser(name, **kw)
        p.add_argument("--output", default=None, help="destination file (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), default=default_format)
        p.set_defaults(func=func)
        return p

    p = add("sieve", cmd_sieve, help="sieve primes and report pi(limit)")
    p.add_argument("--limit", type=int, required=True)
    p.add_argument("--list", action="store_true", help="include every prime")

    p = add("shatter-construct", cmd_shatter_construct, help="build and certify a shattered set")
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--limit", type=int, default=2000, help="sieve limit for the prime supply")

    p = add("shatter-check", cmd_shatter_check, help="test whether a finite class shatters a set")
    p.add_argument("--set", type=_int_list, required=True)
    p.add_argument("--class", dest="cls", choices=("primes", "divisors", "progression"), default="primes")
    p.add_argument("--max-prime", "--max-divisor", dest="max_divisor", type=int, default=100)
    p.add_argument("--k", type=int, default=None)

    p = add("vc-bounds", cmd_vc_bounds, help="formula bounds for the progression classes")
    p.add_argument("--k", type=int, required=True)

    p = add("vc-certify", cmd_vc_certify, help="certified VC dimension of a progression class")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--domain-bound", type=int, default=200)
    p.add_argument("--prime-only", action="store_true")
    p.add_argument("--budget", type=int, default=1_000_000)

    for name, func, help_ in (("erm", cmd_erm, "ERM divisor of a sample"), ("boost", cmd_boost, "run AdaBoost")):
        p = add(name, func, help=help_)
        p.add_argument("--instances", type=_int_list, required=True)
        p.add_argument("--class", dest="cls", choices=("primes", "divisors"),
                       default="divisors" if name == "erm" else "primes")
        p.add_argument("--limit", type=int, default=2)
        if name == "erm":
            p.add_argument("--weights", type=_weight_list, default=None)
        else:
            p.add_argument("--rounds", type=int, default=5)

    p = add("experiment", cmd_experiment, default_format="csv", help="run the convergence experiments")
    p.add_argument("--config", default=None, help="JSON config (default: built-in grid)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--which", choices=("erm", "boost", "both"), default="both")
    p.add_argument("--summary", action="store_true", help="print per-n summaries to stderr")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (DomainError, CapacityError, OSError, json.JSONDecodeError) as exc:
        print(f"primeboost {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
