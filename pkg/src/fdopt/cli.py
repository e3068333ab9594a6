"""Command-line front end.

Verbs: ``run`` (one experiment), ``compare`` (method matrix), perhaps the
most useful during study: ``list-problems``, and ``check`` (the acceptance
suite).  Exit codes: 0 success, 1 usage or config error, 2 run-time numeric
error, 3 acceptance failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .runconfig import (
    ConfigError,
    RunConfig,
    default_out_dir,
    emit_config,
    parse_config_file,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2
EXIT_ACCEPTANCE = 3


class _CliParser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit(2); spec wants 1
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _add_run_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--problem", choices=("ctl", "dvg02", "lj13"))
    p.add_argument("--method", choices=("mlpf", "taylor"))
    p.add_argument("--kernel", choices=("square", "sigmoid_convex"))
    p.add_argument("--use-kdl", dest="use_kdl", action="store_true", default=None)
    p.add_argument("--no-kdl", dest="use_kdl", action="store_false", default=None)
    p.add_argument("--kdl-offset", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--max-steps", type=int)
    p.add_argument("--cost-tol", type=float)
    p.add_argument("--step-tol", type=float)
    p.add_argument("--factorized", action="store_true", default=None)
    p.add_argument("--initial", help="canonical:K, seed:N, or v1,v2,...")
    p.add_argument("--rng-seed", type=int)
    p.add_argument("--label")
    p.add_argument("--trace-format", choices=("csv", "json"))
    p.add_argument("--trace-every", type=int,
                   help="row stride for persistence; 1 = full resolution, 0 = auto")
    p.add_argument("--out", help="output directory (default $FDOPT_OUT or ./runs)")


def _config_from_args(args) -> RunConfig:
    if args.config:
        cfg = parse_config_file(args.config)
    else:
        if not args.problem:
            raise ConfigError("either --config or --problem is required")
        cfg = RunConfig(problem=args.problem)
    overrides = {}
    for key in ("problem", "method", "kernel", "use_kdl", "kdl_offset", "eta",
                "alpha", "beta", "max_steps", "cost_tol", "step_tol",
                "factorized", "initial", "rng_seed", "label",
                "trace_format", "trace_every"):
        v = getattr(args, key, None)
        if v is not None:
            overrides[key] = v
    if args.out is not None:
        overrides["out_dir"] = args.out
    if overrides:
        cfg = replace(cfg, **overrides)
    return cfg.validate()


def _cmd_run(args) -> int:
    from .harness import run_experiment

    cfg = _config_from_args(args)
    trace, path = run_experiment(cfg)
    row = trace.final_row()
    print(f"status: {trace.status}" + (f" ({trace.note})" if trace.note else ""))
    print(f"steps: {trace.steps}")
    print(f"final objective: {float(row['objective'])!r}")
    print(f"final cost: {float(row['rho_cost'])!r}")
    if path:
        print(f"trace: {path}")
    if trace.status == "diverged":
        return EXIT_NUMERIC
    return EXIT_OK


def _cmd_compare(args) -> int:
    from .harness import DEFAULT_VARIANTS, compare_methods, format_summary

    variants = args.variants.split(",") if args.variants else DEFAULT_VARIANTS
    initials = [int(t) for t in args.initials.split(",")] if args.initials else None
    out_dir = args.out or default_out_dir()
    cells = compare_methods(args.problem, initials=initials, variants=variants,
                            out_dir=out_dir, jobs=args.jobs)
    print(format_summary(cells))
    if any(c.status == "error" for c in cells):
        return EXIT_NUMERIC
    return EXIT_OK


def _cmd_list_problems(_args) -> int:
    from .benchmarks import PROBLEM_NAMES, problem_by_name

    for name in PROBLEM_NAMES:
        if name == "lj13":
            print(f"{name:7s} 39 variables, target -44.3268 (icosahedral cluster); "
                  f"initial from seed:N (relaxed local minimum)")
            continue
        p = problem_by_name(name)
        lo, hi = p.domain_box
        inits = "; ".join(str([float(c) for c in v]) for v in p.canonical_initials)
        print(f"{name:7s} {p.graph.variable_dim} variables in [{lo:g},{hi:g}], "
              f"minimum {p.global_minimum_value:g}; initials: {inits}")
    return EXIT_OK


def _cmd_check(args) -> int:
    from .acceptance import run_all

    ok = run_all(out_dir=args.out)
    return EXIT_OK if ok else EXIT_ACCEPTANCE


def _cmd_show_config(args) -> int:
    cfg = _config_from_args(args)
    from .runconfig import apply_problem_defaults

    sys.stdout.write(emit_config(apply_problem_defaults(cfg)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _CliParser(prog="fdopt",
                        description="functional-derivative global optimization runner")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one configured run")
    _add_run_flags(p_run)
    p_run.set_defaults(fn=_cmd_run)

    p_cmp = sub.add_parser("compare", help="run the method-comparison matrix")
    p_cmp.add_argument("--problem", required=True, choices=("ctl", "dvg02", "lj13"))
    p_cmp.add_argument("--variants", help="comma list; default full matrix")
    p_cmp.add_argument("--initials", help="comma list of canonical indices")
    p_cmp.add_argument("--jobs", type=int, default=1)
    p_cmp.add_argument("--out")
    p_cmp.set_defaults(fn=_cmd_compare)

    p_list = sub.add_parser("list-problems", help="show the benchmark catalogue")
    p_list.set_defaults(fn=_cmd_list_problems)

    p_check = sub.add_parser("check", help="run the acceptance suite")
    p_check.add_argument("--out", help="directory for acceptance artifacts")
    p_check.set_defaults(fn=_cmd_check)

    p_show = sub.add_parser("show-config", help="print the resolved config")
    _add_run_flags(p_show)
    p_show.set_defaults(fn=_cmd_show_config)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, ValueError, RuntimeError) as exc:
        print(f"run-time error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    raise SystemExit(main())
