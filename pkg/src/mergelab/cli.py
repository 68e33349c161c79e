"""mergelab command line: simulate, adversary, experiment, sort, bounds.

Exit status is 0 on success, 1 on usage, parse or overflow errors and 2 when
an instrumented invariant fails.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import AlphaOutOfRange, CostOverflow, InstrumentationViolation, MergeLabError
from .policy import PHI, format_alpha, make_policy, parse_alpha

EXIT_OK, EXIT_ERROR, EXIT_VIOLATION = 0, 1, 2


class UsageError(Exception):
    """Bad input reported with exit status 1."""


def parse_run_lengths(text: str, source: str = "<input>"):
    """Whitespace-separated positive integers; ``#`` starts a comment."""
    values = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0]
        for tok in line.split():
            try:
                v = int(tok)
            except ValueError:
                raise UsageError(f"{source}:{lineno}: {tok!r} is not an integer") from None
            if v < 1:
                raise UsageError(f"{source}:{lineno}: run length {v} must be >= 1")
            values.append(v)
    if not values:
        raise UsageError(f"{source}: no run lengths found")
    return values


def parse_elements(text: str, source: str = "<input>"):
    """One signed 64-bit integer per line (blank lines ignored)."""
    values = []
    for lineno, line in enumerate(text.splitlines(), 1):
        tok = line.strip()
        if not tok:
            continue
        try:
            v = int(tok)
        except ValueError:
            raise UsageError(f"{source}:{lineno}: {tok!r} is not an integer") from None
        if not -2**63 <= v < 2**63:
            raise UsageError(f"{source}:{lineno}: {v} does not fit in 64 bits")
        values.append(v)
    return values


def _read_source(path):
    if path is None or path == "-":
        return sys.stdin.read(), "<stdin>"
    try:
        with open(path) as fh:
            return fh.read(), path
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _write_output(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None


def _seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get("MERGELAB_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"MERGELAB_SEED={env!r} is not an integer") from None


def _summary(report) -> str:
    lines = [
        f"policy: {report.policy.label}",
        f"total_cost: {report.total_cost}",
        f"m: {report.m}",
        f"n: {report.n}",
        f"max_stack_height: {report.max_stack_height}",
        f"normalized_cost: {report.normalized():.6f}",
    ]
    for name, count in report.checks.items():
        lines.append(f"check {name}: ok ({count} states)")
    return "\n".join(lines) + "\n"


def _events(report) -> str:
    names = {1: "YZ", 2: "XY"}
    out = ["# step action len_a len_b"]
    for step, action, la, lb in report.event_tuples():
        out.append(f"{step} {names[action]} {la} {lb}")
    return "\n".join(out) + "\n"


# -- subcommands ------------------------------------------------------------------

def cmd_simulate(args):
    from .engine import simulate

    if args.runs:
        text, source = " ".join(args.runs), "<args>"
    else:
        text, source = _read_source(args.input)
    lengths = parse_run_lengths(text, source)
    policy = make_policy(args.policy, args.alpha, force=args.force)
    report = simulate(lengths, policy, instrument=args.instrument,
                      record_events=args.events)
    sys.stdout.write(_summary(report))
    if args.events:
        sys.stdout.write(_events(report))
    return EXIT_OK


def cmd_adversary(args):
    from .adversary import build_adversary, expected_lower_bound, matched_policy
    from .engine import simulate

    try:
        runs = build_adversary(args.kind, args.size, args.alpha)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from None
    _write_output(args.out, " ".join(map(str, runs)) + "\n")
    if args.verify:
        policy = matched_policy(args.kind, args.alpha)
        report = simulate(runs, policy, record_events=False)
        claim, holds = expected_lower_bound(args.kind, runs, args.alpha)
        verdict = "PASS" if holds(report.total_cost) else "FAIL"
        print(f"# verify {policy.label}: n={runs.n} m={runs.m} "
              f"cost={report.total_cost}; expected {claim}: {verdict}",
              file=sys.stderr if args.out in (None, "-") else sys.stdout)
        if verdict == "FAIL":
            return EXIT_VIOLATION
    return EXIT_OK


def _parse_grid(text):
    """Comma list of integers or ``start:stop:step`` (stop inclusive)."""
    try:
        if ":" in text:
            start, stop, step = (int(v) for v in text.split(":"))
            if step < 1:
                raise ValueError("step must be >= 1")
            return list(range(start, stop + 1, step))
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"bad --m-grid {text!r}: {exc}") from None


def _experiment_spec(args):
    from .experiment import DEFAULT_M_GRID, DEFAULT_POLICIES, ExperimentSpec
    from .generators import UNIFORM_1_100, parse_distribution

    cfg = {}
    if args.config:
        text, source = _read_source(args.config)
        try:
            cfg = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"{source}:{exc.lineno}: {exc.msg}") from None
        if not isinstance(cfg, dict):
            raise UsageError(f"{source}: config must be a JSON object")
    policies = args.policy or cfg.get("policies") or list(DEFAULT_POLICIES)
    dist = args.dist or cfg.get("distribution")
    grid = args.m_grid or cfg.get("m_grid")
    if isinstance(grid, str):
        grid = _parse_grid(grid)
    trials = args.trials if args.trials is not None else cfg.get("trials", 100)
    seed = args.seed if args.seed is not None else cfg.get("seed")
    if seed is None:
        seed = _seed(args)
    try:
        return ExperimentSpec(
            policies=[make_policy(p, force=args.force) for p in policies],
            distribution=parse_distribution(dist) if dist else UNIFORM_1_100,
            m_grid=grid or DEFAULT_M_GRID,
            trials=int(trials),
            master_seed=int(seed),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, MergeLabError):
            raise
        raise UsageError(str(exc)) from None


def cmd_experiment(args):
    from .experiment import render_csv, run_experiment

    spec = _experiment_spec(args)
    if args.out not in (None, "-"):
        # fail before the run, not after it
        try:
            open(args.out, "a").close()
        except OSError as exc:
            raise UsageError(f"cannot write {args.out}: {exc.strerror}") from None
    try:
        rows = run_experiment(spec, jobs=args.jobs)
    except CostOverflow as exc:
        raise CostOverflow(f"experiment aborted: {exc}") from None
    _write_output(args.out, render_csv(spec, rows))
    return EXIT_OK


def cmd_sort(args):
    from .runs import sort

    text, source = _read_source(args.input)
    values = parse_elements(text, source)
    policy = make_policy(args.policy, args.alpha, force=args.force)
    result, report = sort(values, policy, record_events=False)
    _write_output(args.out, "".join(f"{v}\n" for v in result))
    print(_summary(report), end="", file=sys.stderr if args.out in (None, "-") else sys.stdout)
    return EXIT_OK


def cmd_bounds(args):
    from .analysis import bound_set

    rows = []
    for text in args.alpha:
        a = parse_alpha(text)
        if not 1 < a <= 2:
            raise AlphaOutOfRange(f"alpha must lie in (1, 2], got {text}")
        rows.append(bound_set(a))
    print(f"{'alpha':>8} {'c_alpha':>12} {'k0':>4} {'d_alpha':>14}")
    for bs in rows:
        k0 = "-" if bs.k0 is None else str(bs.k0)
        d = "undefined" if bs.d is None else f"{bs.d:.6f}"
        note = "  (alpha <= phi: no upper bound)" if bs.d is None and float(bs.alpha) <= PHI else ""
        print(f"{format_alpha(bs.alpha):>8} {bs.c:>12.8f} {k0:>4} {d:>14}{note}")
    return EXIT_OK


# -- argument parsing -----------------------------------------------------------

def _add_policy_args(p, multiple=False):
    if multiple:
        p.add_argument("--policy", action="append",
                       help="policy, optionally with alpha as NAME:ALPHA (repeatable)")
    else:
        p.add_argument("--policy", default="two-merge",
                       help="timsort, alpha-stack, shivers, augmented-shivers, "
                            "two-merge or alpha-merge (default: %(default)s)")
        p.add_argument("--alpha", help="alpha for alpha-stack / alpha-merge, e.g. 1.62")
    p.add_argument("--force", action="store_true",
                   help="allow alpha-merge with any alpha in (1, 2]")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mergelab", description="Merge-policy laboratory for natural merge sorts.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="merge cost of a run-length sequence")
    p.add_argument("input", nargs="?", help="run-length file (default: stdin)")
    p.add_argument("--runs", nargs="+", metavar="LEN", help="run lengths inline")
    _add_policy_args(p)
    p.add_argument("--instrument", action="append", default=[],
                   choices=["shivers-weights", "alpha-counter"],
                   help="check a proof invariant at every step")
    p.add_argument("--events", action="store_true", help="print the merge event log")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("adversary", help="emit an adversarial run-length sequence")
    p.add_argument("kind", help="rtim, rastack, rshivers or ramerge")
    p.add_argument("size", type=int, help="n for rtim/ramerge, m for rastack/rshivers")
    p.add_argument("--alpha", help="alpha for rastack / ramerge")
    p.add_argument("--verify", action="store_true",
                   help="simulate the matched policy and check the lower bound")
    p.add_argument("--out", help="output file (default: stdout)")
    p.set_defaults(func=cmd_adversary)

    p = sub.add_parser("experiment", help="normalized cost sweep to CSV")
    _add_policy_args(p, multiple=True)
    p.add_argument("--dist", help="uniform:LO:HI or mixture (default: uniform:1:100)")
    p.add_argument("--m-grid", help="comma list or START:STOP:STEP (default: 1000:8000:500)")
    p.add_argument("--trials", type=int, help="trials per m (default: 100)")
    p.add_argument("--seed", type=int, help="master seed (default: $MERGELAB_SEED or 0)")
    p.add_argument("--config", help="JSON file with policies, distribution, m_grid, trials, seed")
    p.add_argument("--jobs", type=int, default=1, help="worker threads")
    p.add_argument("--out", help="CSV output file (default: stdout)")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("sort", help="sort a file of integers, one per line")
    p.add_argument("input", nargs="?", help="input file (default: stdin)")
    _add_policy_args(p)
    p.add_argument("--out", help="output file (default: stdout)")
    p.set_defaults(func=cmd_sort)

    p = sub.add_parser("bounds", help="print c_alpha, k0 and d_alpha")
    p.add_argument("alpha", nargs="+", help="alpha values in (1, 2]")
    p.set_defaults(func=cmd_bounds)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; 2 is reserved for violations here
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    try:
        return args.func(args)
    except InstrumentationViolation as exc:
        print(f"mergelab: invariant violated: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    except (UsageError, MergeLabError, ValueError, OverflowError) as exc:
        print(f"mergelab: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
