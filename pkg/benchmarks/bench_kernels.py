"""Compare the compiled and pure-Python transition kernels.

Both tables are built from the same grounded Blocksworld tasks. Two
workloads are timed: repeated ``expand`` on the initial state, and a
breadth-first closure of the reachable state space.

    python3 benchmarks/bench_kernels.py --blocks 5 --tasks 5
"""

from __future__ import annotations

import argparse
import random
import time
from collections import deque

from pddlsim import _kernels_py
from pddlsim import blocksworld as bw
from pddlsim.pddl import parse_domain, parse_problem
from pddlsim.task import GroundedTask

try:
    from pddlsim import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def table_args(task: GroundedTask):
    ix = task.atom_index
    rows = lambda attr: [[ix[x] for x in sorted(getattr(a, attr))] for a in task.actions]
    return (len(task.atoms), rows("pre_pos"), rows("pre_neg"), rows("adds"), rows("dels"))


def closure(table, start: bytes) -> int:
    seen, frontier = {start}, deque([start])
    while frontier:
        for _, nxt in table.expand(frontier.popleft()):
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return len(seen)


def timed(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--blocks", type=int, default=5)
    ap.add_argument("--tasks", type=int, default=5)
    ap.add_argument("--expands", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    backends = {"python": _kernels_py.ActionTable}
    if _kernels_c is not None:
        backends["cython"] = _kernels_c.ActionTable
    else:
        print("compiled kernel not built; timing the pure-Python backend only")

    rng = random.Random(args.seed)
    domain = parse_domain(bw.domain_text())
    tasks = [GroundedTask(domain, parse_problem(bw.random_problem(args.blocks, rng, f"b{k}"), domain))
             for k in range(args.tasks)]
    totals = {name: [0.0, 0.0] for name in backends}
    states = None
    for task in tasks:
        targs = table_args(task)
        sizes = set()
        for name, cls in backends.items():
            table = cls(*targs)
            start = task.initial
            totals[name][0] += timed(lambda: [table.expand(start) for _ in range(args.expands)], args.repeat)
            totals[name][1] += timed(lambda: sizes.add(closure(table, start)), args.repeat)
        assert len(sizes) == 1, "backends disagree on the reachable state count"
        states = (states or 0) + sizes.pop()

    print(f"{args.tasks} task(s), {args.blocks} blocks, {states} reachable states in total")
    print(f"{'backend':<8}  {'expand x' + str(args.expands):>14}  {'closure':>10}")
    for name, (exp, clo) in totals.items():
        print(f"{name:<8}  {exp:>12.3f} s  {clo:>8.3f} s")
    if "cython" in totals:
        py, cy = totals["python"], totals["cython"]
        print(f"speed-up  {py[0] / cy[0]:>13.1f}x  {py[1] / cy[1]:>9.1f}x")


if __name__ == "__main__":
    main()
