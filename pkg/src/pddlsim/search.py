"""Ground-truth planners over the grounded transition system.

Both searches keep a closed set keyed by the canonical state encoding, so
no state is expanded twice. Successors are generated in the grounding's
lexicographic action order, which fixes tie-breaking.
"""

from __future__ import annotations

import heapq
import itertools
import time
from collections import deque
from dataclasses import dataclass

from .pddl import Domain, Problem, Signature
from .task import GroundedTask
from .validator import validate_plan

DEFAULT_NODE_BUDGET = 1_000_000


@dataclass(frozen=True)
class SearchResult:
    plan: list[Signature] | None
    nodes_expanded: int
    optimal: bool
    exhausted: bool

    @property
    def solved(self) -> bool:
        return self.plan is not None


def _past(deadline: float | None, expanded: int) -> bool:
    # the clock is only read every 512 expansions
    return deadline is not None and expanded & 511 == 0 and time.monotonic() >= deadline


def _extract(parents: dict[bytes, tuple[bytes, int] | None], state: bytes, task: GroundedTask) -> list[Signature]:
    steps = []
    link = parents[state]
    while link is not None:
        prev, a = link
        steps.append(task.actions[a].signature)
        link = parents[prev]
    steps.reverse()
    return steps


def _checked(result: SearchResult, task: GroundedTask) -> SearchResult:
    if result.plan is not None:
        report = validate_plan(task.domain, task.problem, result.plan, task=task)
        if not report.valid:
            raise RuntimeError(f"search produced an invalid plan: {report.message}")
    return result


def _task(domain: Domain | GroundedTask, problem: Problem | None) -> GroundedTask:
    if isinstance(domain, GroundedTask):
        return domain
    return GroundedTask(domain, problem)


def solve_optimal(domain: Domain | GroundedTask, problem: Problem | None = None,
                  node_budget: int = DEFAULT_NODE_BUDGET, deadline: float | None = None) -> SearchResult:
    """Breadth-first search; returns a shortest plan when one exists within budget.

    ``exhausted`` is set when the node budget or the monotonic-clock
    ``deadline`` stopped the search before the space was closed.
    """
    if node_budget <= 0:
        raise ValueError("node_budget must be positive")
    task = _task(domain, problem)
    start = task.initial
    if task.is_goal(start):
        return SearchResult([], 0, True, False)
    parents: dict[bytes, tuple[bytes, int] | None] = {start: None}
    frontier = deque([start])
    expanded = 0
    expand = task.table.expand
    is_goal = task.is_goal
    while frontier:
        if expanded >= node_budget or _past(deadline, expanded):
            return SearchResult(None, expanded, True, True)
        state = frontier.popleft()
        expanded += 1
        for a, nxt in expand(state):
            if nxt in parents:
                continue
            parents[nxt] = (state, a)
            if is_goal(nxt):
                return _checked(SearchResult(_extract(parents, nxt, task), expanded, True, False), task)
            frontier.append(nxt)
    return SearchResult(None, expanded, True, False)


def solve_greedy(domain: Domain | GroundedTask, problem: Problem | None = None,
                 node_budget: int = DEFAULT_NODE_BUDGET, deadline: float | None = None) -> SearchResult:
    """Greedy best-first search on the number of unsatisfied goal literals."""
    if node_budget <= 0:
        raise ValueError("node_budget must be positive")
    task = _task(domain, problem)
    start = task.initial
    parents: dict[bytes, tuple[bytes, int] | None] = {start: None}
    counter = itertools.count()
    heap = [(task.goal_distance(start), next(counter), start)]
    expanded = 0
    expand = task.table.expand
    h = task.goal_distance
    while heap:
        dist, _, state = heapq.heappop(heap)
        if dist == 0:
            return _checked(SearchResult(_extract(parents, state, task), expanded, False, False), task)
        if expanded >= node_budget or _past(deadline, expanded):
            return SearchResult(None, expanded, False, True)
        expanded += 1
        for a, nxt in expand(state):
            if nxt in parents:
                continue
            parents[nxt] = (state, a)
            heapq.heappush(heap, (h(nxt), next(counter), nxt))
    return SearchResult(None, expanded, False, False)
