"""Command line entry point.

Subcommands: ``project`` (l1-ball projection of a vector file),
``solve`` (one solver on one problem), ``bench`` (full benchmark run),
``tradeoff`` (exact trade-off curve export), ``verify`` (invariant
suite).  Problems come from a config file or a ``--builtin`` name.
Exit codes: 0 success, 1 failed checks or solver errors, 2 malformed
flags or config.
"""

import argparse
import sys

import numpy as np

from .harness import (
    BUILTIN_CONFIGS,
    BenchmarkConfig,
    ConfigError,
    export_tradeoff,
    generate_problem,
    load_config,
    run_benchmark,
    run_invariant_suite,
)
from .homotopy import DegeneratePathError, solve_homotopy
from .prox import project_l1


def _read_vector(path):
    with open(path) as fh:
        tokens = fh.read().split()
    if not tokens:
        raise ConfigError(f"{path}: empty vector file")
    try:
        return np.array([float(t) for t in tokens])
    except ValueError as exc:
        raise ConfigError(f"{path}: non-numeric entry") from exc


def _add_problem_source(parser):
    parser.add_argument("config", nargs="?", help="config file (key = value lines)")
    parser.add_argument(
        "--builtin",
        choices=sorted(BUILTIN_CONFIGS),
        help="use a builtin problem configuration instead of a config file",
    )


def _resolve_config(args, overrides=None):
    if args.builtin and args.config:
        raise ConfigError("give either a config file or --builtin, not both")
    if args.builtin:
        mapping = dict(BUILTIN_CONFIGS[args.builtin])
        if overrides:
            mapping.update({k: str(v) for k, v in overrides.items() if v is not None})
        return BenchmarkConfig.from_mapping(mapping)
    if not args.config:
        raise ConfigError("a config file or --builtin is required")
    if overrides:
        from .harness import parse_config_text
        from pathlib import Path

        mapping = parse_config_text(Path(args.config).read_text())
        return BenchmarkConfig.from_mapping(mapping, overrides=overrides)
    return load_config(args.config)


def _cmd_project(args):
    vector = _read_vector(args.vector)
    result = project_l1(vector, args.radius)
    lines = [format(v, ".17g") for v in result.x]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(
        f"mu = {result.mu:.17g}  identity = {int(result.was_identity)}",
        file=sys.stderr,
    )
    return 0


def _cmd_solve(args):
    overrides = {
        "seed": args.seed,
        "out": args.out,
        "tau": args.tau,
        "radius": args.radius,
        "max_iter": args.max_iter,
        "tol": args.tol,
        "solvers": args.solver,
    }
    config = _resolve_config(args, overrides)
    report = run_benchmark(config)
    outcome = report.outcomes[args.solver]
    if outcome.aborted:
        print(f"{args.solver}: aborted: {outcome.aborted}", file=sys.stderr)
        return 1
    print(report.to_text())
    print(f"trace written to {outcome.trace_file}")
    return 0


def _cmd_bench(args):
    config = _resolve_config(args, {"seed": args.seed, "out": args.out})
    report = run_benchmark(config)
    print(report.to_text())
    if any(out.aborted for out in report.outcomes.values()):
        return 1
    return 0


def _cmd_tradeoff(args):
    config = _resolve_config(args, {"seed": args.seed})
    instance = generate_problem(config)
    try:
        _, path = solve_homotopy(instance.problem, tau=instance.tau)
    except DegeneratePathError as exc:
        print(f"path degenerated: {exc}", file=sys.stderr)
        return 1
    out = export_tradeoff(path, args.out)
    print(f"trade-off curve ({len(path.breakpoints)} breakpoints) written to {out}")
    return 0


def _cmd_verify(args):
    config = _resolve_config(args, {"seed": args.seed})
    checks = run_invariant_suite(config)
    failures = 0
    for name, passed, detail in checks:
        status = "PASS" if passed else "FAIL"
        print(f"[{status}] {name}: {detail}")
        failures += 0 if passed else 1
    if failures:
        print(f"{failures} of {len(checks)} checks failed", file=sys.stderr)
        return 1
    print(f"all {len(checks)} checks passed")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="l1inv",
        description=(
            "Solvers and benchmarks for l1-constrained and l1-penalized "
            "linear inverse problems."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("project", help="project a vector file onto an l1 ball")
    p.add_argument("vector", help="whitespace-separated numbers")
    p.add_argument("--radius", type=float, required=True)
    p.add_argument("--out", help="write the projection here instead of stdout")
    p.set_defaults(func=_cmd_project)

    p = sub.add_parser("solve", help="run one solver on one problem")
    _add_problem_source(p)
    p.add_argument("--solver", required=True)
    p.add_argument("--tau", type=float)
    p.add_argument("--radius", type=float)
    p.add_argument("--max-iter", dest="max_iter", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("bench", help="run the configured benchmark")
    _add_problem_source(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("tradeoff", help="emit the exact trade-off curve")
    _add_problem_source(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", default="tradeoff.csv")
    p.set_defaults(func=_cmd_tradeoff)

    p = sub.add_parser("verify", help="run the invariant suite on a problem")
    _add_problem_source(p)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=_cmd_verify)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
