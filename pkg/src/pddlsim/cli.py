"""``pddlsim`` command line.

Exit codes: 0 success, 1 domain-level failure (invalid plan, no solution,
PDDL error), 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import PddlError

OK, FAILURE, USAGE = 0, 1, 2


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _load(domain_path: str, problem_path: str | None = None):
    from .pddl import parse_domain, parse_problem

    domain = parse_domain(_read(domain_path))
    problem = parse_problem(_read(problem_path), domain) if problem_path else None
    return domain, problem


def cmd_parse(args) -> int:
    domain, problem = _load(args.domain, args.problem)
    print(f"domain {domain.name}")
    print(f"  requirements: {' '.join(sorted(domain.requirements)) or '(none)'}")
    print(f"  types: {len(domain.types)}  constants: {len(domain.constants)}  "
          f"predicates: {len(domain.predicates)}  actions: {len(domain.actions)}")
    for a in domain.actions:
        params = " ".join(f"{v} - {t}" for v, t in a.params)
        print(f"  action {a.name} ({params}): {len(a.precondition)} pre, "
              f"{len(a.add_effects)} add, {len(a.delete_effects)} del")
    if problem is not None:
        print(f"problem {problem.name} (domain {problem.domain_name})")
        print(f"  objects: {len(problem.objects)}  init atoms: {len(problem.init)}  "
              f"goal literals: {len(problem.goal)}")
    return OK


def cmd_ground(args) -> int:
    from .grounding import ground

    domain, problem = _load(args.domain, args.problem)
    actions = ground(domain, problem)
    print(f"{len(actions)} ground action(s)")
    if not args.count_only:
        for a in actions:
            print(a)
    return OK


def cmd_validate(args) -> int:
    from .pddl import parse_plan
    from .validator import validate_plan

    domain, problem = _load(args.domain, args.problem)
    plan = parse_plan(_read(args.plan))
    report = validate_plan(domain, problem, plan)
    print(("VALID: " if report.valid else "INVALID: ") + report.message)
    print(f"steps applied: {report.steps_applied}/{report.plan_length}; goal satisfied: {report.goal_satisfied}")
    return OK if report.valid else FAILURE


def cmd_solve(args) -> int:
    import time

    from .pddl import serialize_plan
    from .search import solve_greedy, solve_optimal

    domain, problem = _load(args.domain, args.problem)
    search = solve_greedy if args.greedy else solve_optimal
    deadline = time.monotonic() + args.timeout if args.timeout else None
    result = search(domain, problem, node_budget=args.node_budget, deadline=deadline)
    if not result.solved:
        why = "search budget exhausted" if result.exhausted else "goal unreachable"
        print(f"no plan found ({why}; {result.nodes_expanded} nodes expanded)", file=sys.stderr)
        return FAILURE
    sys.stdout.write(serialize_plan(result.plan))
    print(f"; {len(result.plan)} action(s), {result.nodes_expanded} nodes expanded"
          f"{', optimal' if result.optimal else ''}")
    return OK


def cmd_serve(args) -> int:
    from .mcp_server import serve

    serve()
    return OK


def cmd_bench(args) -> int:
    from .bench import compute_metrics, load_manifest, make_adapters, render_report, run_suite
    from .config import load_config

    config = load_config(args.config)
    budget = args.budget if args.budget is not None else config.budget
    parallelism = args.parallelism if args.parallelism is not None else config.parallelism
    log_path = Path(args.log) if args.log else config.log or Path("runs.jsonl")
    names = [n for part in args.adapters for n in part.split(",") if n]
    instances = load_manifest(args.manifest)
    adapters = make_adapters(names, config)
    for r in run_suite(instances, adapters, budget=budget, parallelism=parallelism, log_path=log_path):
        length = f" length {r.plan_length}" if r.plan_length is not None else ""
        print(f"[{r.instance:>4}] {r.instance_name:<24} {r.approach:<16} {r.status}{length} "
              f"({r.wall_time_s:.2f} s)", flush=True)
    print(f"log: {log_path}")
    if args.report:
        from .bench import RunLog

        report = compute_metrics(RunLog(log_path).load(), approaches=names)
        print(render_report(report)[0], end="")
    return OK


def cmd_report(args) -> int:
    from .bench import RunLog, compute_metrics, hard_case_analysis, render_hard_cases, render_report

    if not Path(args.log).exists():
        raise FileNotFoundError(args.log)
    records = RunLog(args.log).load()
    approaches = args.approaches.split(",") if args.approaches else None
    labels = dict(item.split("=", 1) for item in args.label)
    report = compute_metrics(records, block_size=args.block_size, difficulty_key=args.difficulty_key,
                             approaches=approaches)
    text, summary = render_report(report, labels)
    print(text, end="")
    if args.hard_set:
        ids = [int(x) for x in args.hard_set.split(",") if x]
        analysis = hard_case_analysis(records, ids, report.approaches)
        print()
        print(render_hard_cases(analysis, labels), end="")
        summary["hard_cases"] = {"hard_set": analysis.hard_set, "solved": analysis.solved,
                                 "common": analysis.common,
                                 "only": {f"{a}|{b}": v for (a, b), v in analysis.only.items()}}
    if args.json:
        Path(args.json).write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    return OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pddlsim", description="STRIPS simulator, validator, tool server and benchmark harness")
    p.add_argument("-v", "--verbose", action="store_true", help="log diagnostics to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("parse", help="parse a domain (and problem) and summarise it")
    s.add_argument("domain")
    s.add_argument("problem", nargs="?")
    s.set_defaults(func=cmd_parse)

    s = sub.add_parser("ground", help="list the ground actions of a task")
    s.add_argument("domain")
    s.add_argument("problem")
    s.add_argument("--count-only", action="store_true")
    s.set_defaults(func=cmd_ground)

    s = sub.add_parser("validate", help="check a plan; exit 0 iff it is valid")
    s.add_argument("domain")
    s.add_argument("problem")
    s.add_argument("plan")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("solve", help="solve with the built-in search")
    s.add_argument("domain")
    s.add_argument("problem")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--optimal", action="store_true", help="breadth-first, shortest plan (default)")
    g.add_argument("--greedy", action="store_true", help="greedy best-first on goal count")
    s.add_argument("--node-budget", type=int, default=1_000_000)
    s.add_argument("--timeout", type=float, default=None, help="seconds")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("serve", help="run the MCP tool server on stdin/stdout")
    s.set_defaults(func=cmd_serve)

    s = sub.add_parser("bench", help="run adapters over a suite manifest")
    s.add_argument("manifest")
    s.add_argument("--adapters", nargs="+", required=True,
                   help="oracle, greedy, direct, agentic or a [planners] name from the config")
    s.add_argument("--budget", type=float, default=None, help="seconds per run (default 180)")
    s.add_argument("--parallelism", type=int, default=None)
    s.add_argument("--log", default=None, help="JSONL run log (resumed if it exists)")
    s.add_argument("--config", default=None, help="INI config file")
    s.add_argument("--report", action="store_true", help="print the report after the runs")
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("report", help="compute metrics from a run log")
    s.add_argument("log")
    s.add_argument("--approaches", default=None, help="comma-separated subset, in column order")
    s.add_argument("--block-size", type=int, default=10)
    s.add_argument("--difficulty-key", default=None)
    s.add_argument("--hard-set", default=None, help="comma-separated instance ids")
    s.add_argument("--label", action="append", default=[], metavar="APPROACH=LABEL")
    s.add_argument("--json", default=None, help="write the machine-readable summary here")
    s.set_defaults(func=cmd_report)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    from .config import ConfigError

    try:
        return args.func(args)
    except PddlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FAILURE
    except (OSError, ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except KeyboardInterrupt:
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
