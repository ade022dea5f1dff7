"""Command line front end: solve, replay, verify, bench, serve."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .bench import (
    MAX_INSTANCE,
    BenchResult,
    baseline_generate_and_test,
    generate_instance,
    results_to_csv,
    run_benchmark,
    summarize,
)
from .engine import (
    SolveOptions,
    SolveResult,
    SolveTimeoutError,
    replay,
    solve,
)
from .model import ConfigurationError
from .strategies import STRATEGIES, strategy_by_name
from .textio import (
    format_configuration,
    format_trace_lines,
    parse_configuration,
    parse_trace,
)
from .verifier import PROPERTIES, Scope, ScopeExhaustedUnsolvedError, check_algorithm

DEFAULT_TIMEOUT_ENV = "RACKCONFIG_TIMEOUT"


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _parse_instance_range(spec: str) -> list[int]:
    """``1..5,8`` -> [1, 2, 3, 4, 5, 8]."""
    out: list[int] = []
    for part in spec.split(","):
        part = part.strip()
        if ".." in part:
            lo_text, hi_text = part.split("..", 1)
            lo, hi = int(lo_text), int(hi_text)
            if lo > hi:
                raise ValueError(f"empty range {part!r}")
            out.extend(range(lo, hi + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise ValueError(f"no instances in {spec!r}")
    for i in out:
        if not 1 <= i <= MAX_INSTANCE:
            raise ValueError(f"instance {i} outside 1..{MAX_INSTANCE}")
    return out


def _default_timeout() -> float:
    raw = os.environ.get(DEFAULT_TIMEOUT_ENV)
    if raw is None:
        return 600.0
    try:
        return float(raw)
    except ValueError:
        raise SystemExit(
            f"{DEFAULT_TIMEOUT_ENV} must be a number, got {raw!r}"
        ) from None


def _static_dir() -> Path | None:
    raw = os.environ.get("RACKCONFIG_STATIC")
    if raw:
        path = Path(raw)
        return path if path.is_dir() else None
    bundled = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    return bundled if bundled.is_dir() else None


def _cmd_solve(args: argparse.Namespace) -> int:
    initial = parse_configuration(_read_text(args.input))
    strategy = strategy_by_name(args.strategy)
    trace = solve(initial, strategy, SolveOptions(max_steps=args.max_steps))
    if args.emit_trace:
        lines = format_trace_lines(initial, [(ts.index, ts.action) for ts in trace.steps])
        Path(args.emit_trace).write_text(lines, encoding="utf-8")
    if trace.result is not SolveResult.SOLVED:
        print(f"no solution: {trace.result.value}", file=sys.stderr)
        return 1
    _write_text(args.out, format_configuration(trace.final_state))
    print(f"steps: {len(trace)}")
    return 0


def _cmd_replay(args: argparse.Namespace) -> int:
    initial, actions = parse_trace(_read_text(args.trace))
    final = replay(initial, actions)
    _write_text(args.out, format_configuration(final))
    print(f"steps: {len(actions)}")
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    prop = PROPERTIES[args.property]
    scope = Scope(args.scope, max_steps=args.max_steps)
    counterexample = check_algorithm(prop, scope)
    if counterexample is None:
        print(
            f"property {prop.name!r} holds for all inputs with at most "
            f"{args.scope} elements per type"
        )
        return 0
    counts = counterexample.counts
    print(f"counterexample: elements (A,B,C,D) = {counts}")
    for witness in counterexample.witnesses:
        print(f"  witness: {witness}")
    print(f"  steps: {len(counterexample.trace)}")
    if args.out:
        lines = format_trace_lines(
            counterexample.trace.initial,
            [(ts.index, ts.action) for ts in counterexample.trace.steps],
        )
        Path(args.out).write_text(lines, encoding="utf-8")
        print(f"  trace written to {args.out}")
    return 1


def _cmd_bench(args: argparse.Namespace) -> int:
    names = [n.strip() for n in args.strategies.split(",") if n.strip()]
    for name in names:
        if name != "baseline" and name not in STRATEGIES:
            raise SystemExit(
                f"unknown strategy {name!r}; choose from "
                f"{sorted(STRATEGIES) + ['baseline']}"
            )
    instances = _parse_instance_range(args.instances)
    timeout = args.timeout if args.timeout is not None else _default_timeout()
    strategies = [strategy_by_name(n) for n in names if n != "baseline"]
    results = run_benchmark(
        strategies, instances, timeout_s=timeout, max_steps=args.max_steps
    )
    if "baseline" in names:
        for index in instances:
            outcome = baseline_generate_and_test(generate_instance(index), timeout)
            results.append(
                BenchResult(
                    "baseline", index, outcome.outcome, outcome.wall_time_s, 0, 0
                )
            )
    if args.out:
        Path(args.out).write_text(results_to_csv(results), encoding="utf-8")
    sys.stdout.write(summarize(results))
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    host, _, port_text = args.bind.rpartition(":")
    if not host or not port_text.isdigit():
        raise SystemExit(f"--bind must be host:port, got {args.bind!r}")
    uvicorn.run(create_app(static_dir=_static_dir()), host=host, port=int(port_text))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rackconfig",
        description="Incremental configuration engine for hardware racks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="complete a configuration")
    p_solve.add_argument("input", help="configuration file ('-' for stdin)")
    p_solve.add_argument(
        "--strategy", default="generic", choices=sorted(STRATEGIES)
    )
    p_solve.add_argument("--max-steps", type=int, default=500)
    p_solve.add_argument("--emit-trace", metavar="PATH")
    p_solve.add_argument("--out", metavar="PATH")
    p_solve.set_defaults(func=_cmd_solve)

    p_replay = sub.add_parser("replay", help="re-apply a recorded trace")
    p_replay.add_argument("trace", help="trace file ('-' for stdin)")
    p_replay.add_argument("--out", metavar="PATH")
    p_replay.set_defaults(func=_cmd_replay)

    p_verify = sub.add_parser("verify", help="search a scope for counterexamples")
    p_verify.add_argument(
        "--property", default="same-frame", choices=sorted(PROPERTIES)
    )
    p_verify.add_argument("--scope", type=int, default=2)
    p_verify.add_argument("--max-steps", type=int, default=500)
    p_verify.add_argument("--out", metavar="PATH", help="write counterexample trace")
    p_verify.set_defaults(func=_cmd_verify)

    p_bench = sub.add_parser("bench", help="run the benchmark suite")
    p_bench.add_argument("--strategies", default="algorithmic")
    p_bench.add_argument("--instances", default=f"1..{MAX_INSTANCE}")
    p_bench.add_argument(
        "--timeout",
        type=float,
        default=None,
        help=f"seconds per run (default ${DEFAULT_TIMEOUT_ENV} or 600)",
    )
    p_bench.add_argument("--max-steps", type=int, default=500)
    p_bench.add_argument("--out", metavar="CSV")
    p_bench.set_defaults(func=_cmd_bench)

    p_serve = sub.add_parser("serve", help="start the HTTP session service")
    p_serve.add_argument("--bind", default="127.0.0.1:8000")
    p_serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScopeExhaustedUnsolvedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SolveTimeoutError as exc:
        print(f"error: timed out: {exc}", file=sys.stderr)
        return 2
    except (ConfigurationError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
