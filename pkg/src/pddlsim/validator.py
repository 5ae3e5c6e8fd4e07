"""Whole-plan validation, sharing the engine's transition function."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .engine import apply_action, goal_satisfied, unsatisfied_preconditions
from .errors import UnknownAction
from .pddl import Atom, Domain, Literal, Problem, Signature, format_signature
from .task import GroundedTask


@dataclass(frozen=True)
class FailingStep:
    index: int  # 1-based position in the plan
    signature: Signature
    unsatisfied: tuple[Literal, ...]


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    steps_applied: int
    failing_step: FailingStep | None
    final_state: frozenset[Atom]
    goal_satisfied: bool
    plan_length: int

    @property
    def message(self) -> str:
        if self.valid:
            return f"valid plan of {self.plan_length} action(s); all goal conditions satisfied"
        if self.failing_step is not None:
            f = self.failing_step
            return (f"step {f.index} {format_signature(f.signature)} is not applicable; unsatisfied: "
                    + " ".join(str(l) for l in f.unsatisfied))
        return f"all {self.plan_length} action(s) applied but the goal is not satisfied"


def validate_plan(domain: Domain, problem: Problem, plan: Iterable[Signature],
                  task: GroundedTask | None = None) -> ValidationReport:
    """Simulate ``plan`` from the initial state, stopping at the first inapplicable step.

    Raises :class:`UnknownAction` for a signature outside the grounding. Pass
    ``task`` to reuse an existing grounding.
    """
    if task is None:
        task = GroundedTask(domain, problem)
    plan = [tuple(s) for s in plan]
    state = problem.init
    for i, sig in enumerate(plan, start=1):
        idx = task.index_of.get(sig)
        if idx is None:
            raise UnknownAction(format_signature(sig))
        action = task.actions[idx]
        missing = unsatisfied_preconditions(state, action)
        if missing:
            return ValidationReport(False, i - 1, FailingStep(i, sig, tuple(missing)), state,
                                    goal_satisfied(state, problem.goal), len(plan))
        state = apply_action(state, action)
    reached = goal_satisfied(state, problem.goal)
    return ValidationReport(reached, len(plan), None, state, reached, len(plan))
