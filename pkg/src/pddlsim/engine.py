"""Interactive simulation sessions over grounded STRIPS tasks.

An :class:`Engine` holds named sessions in memory. Each session keeps the
current state, the history of successfully applied actions and a count of
rejected attempts. Calls on one session are serialised by a per-session
lock; distinct sessions are independent.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .errors import DomainMismatch, IncompatiblePair, PddlError, UnknownAction, UnknownSession
from .grounding import GroundAction
from .pddl import Atom, Literal, all_objects, Signature, format_signature, parse_domain, parse_problem, parse_signature
from .task import GroundedTask

State = frozenset  # of ground atoms; absence means false


def apply_action(state: State, action: GroundAction) -> State:
    """STRIPS successor: deletes first, then adds."""
    return (state - action.dels) | action.adds


def unsatisfied_preconditions(state: State, action: GroundAction) -> list[Literal]:
    missing = [Literal(a[0], a[1:], True) for a in sorted(action.pre_pos) if a not in state]
    missing += [Literal(a[0], a[1:], False) for a in sorted(action.pre_neg) if a in state]
    return missing


def goal_satisfied(state: State, goal: Iterable[Literal]) -> bool:
    return all((l.atom in state) == l.positive for l in goal)


def load_source(source: str | Path) -> str:
    """Accept PDDL text or a path to a PDDL file."""
    if isinstance(source, Path):
        return source.read_text(encoding="utf-8")
    stripped = source.lstrip()
    if stripped.startswith("(") or stripped.startswith(";"):
        return source
    return Path(source).read_text(encoding="utf-8")


def coerce_signature(sig: str | Iterable[str]) -> Signature:
    if isinstance(sig, str):
        return parse_signature(sig)
    return tuple(str(s).lower() for s in sig)


@dataclass
class SessionSummary:
    session_id: str
    num_objects: int
    num_init_atoms: int
    num_goal_literals: int
    num_ground_actions: int
    goal_reached: bool


@dataclass
class StepResult:
    applied: bool
    state: tuple[Atom, ...]
    goal_reached: bool
    message: str
    unsatisfied: tuple[Literal, ...] = ()
    step: int | None = None


@dataclass
class Session:
    id: str
    task: GroundedTask
    current: State
    history: list[tuple[int, Signature]] = field(default_factory=list)
    failed_attempts: int = 0
    lock: threading.RLock = field(default_factory=threading.RLock, repr=False)

    @property
    def domain(self):
        return self.task.domain

    @property
    def problem(self):
        return self.task.problem

    @property
    def goal_reached(self) -> bool:
        return goal_satisfied(self.current, self.problem.goal)

    def sorted_state(self) -> tuple[Atom, ...]:
        return tuple(sorted(self.current))

    def replay(self) -> State:
        """Fold the history over the initial state (used as a consistency check)."""
        state = self.problem.init
        for _, sig in self.history:
            state = apply_action(state, self.task.actions[self.task.index_of[sig]])
        return state


class Engine:
    def __init__(self):
        self._sessions: dict[str, Session] = {}
        self._registry_lock = threading.Lock()
        self._counter = 0

    # -- registry ---------------------------------------------------------

    @property
    def session_ids(self) -> list[str]:
        with self._registry_lock:
            return sorted(self._sessions)

    def session(self, session_id: str | None = None) -> Session:
        """Look up a session; ``None`` resolves to the only live session."""
        with self._registry_lock:
            if session_id is None:
                if len(self._sessions) == 1:
                    return next(iter(self._sessions.values()))
                if not self._sessions:
                    raise UnknownSession("(none initialised)")
                raise PddlError("session_id is required when more than one session exists")
            try:
                return self._sessions[session_id]
            except KeyError:
                raise UnknownSession(session_id) from None

    def close_session(self, session_id: str) -> None:
        with self._registry_lock:
            if self._sessions.pop(session_id, None) is None:
                raise UnknownSession(session_id)

    # -- operations -------------------------------------------------------

    def initialise_session(self, domain_source: str | Path, problem_source: str | Path,
                           session_id: str | None = None) -> SessionSummary:
        domain = parse_domain(load_source(domain_source))
        try:
            problem = parse_problem(load_source(problem_source), domain)
        except DomainMismatch as exc:
            raise IncompatiblePair(exc.expected, exc.got) from None
        task = GroundedTask(domain, problem)
        with self._registry_lock:
            if session_id is None:
                self._counter += 1
                session_id = f"s{self._counter}"
                while session_id in self._sessions:
                    self._counter += 1
                    session_id = f"s{self._counter}"
            session = Session(session_id, task, problem.init)
            self._sessions[session_id] = session
        return SessionSummary(
            session_id=session_id,
            num_objects=len(all_objects(domain, problem)),
            num_init_atoms=len(problem.init),
            num_goal_literals=len(problem.goal),
            num_ground_actions=len(task.actions),
            goal_reached=session.goal_reached,
        )

    def query_current_state(self, session_id: str | None = None) -> tuple[tuple[Atom, ...], bool]:
        s = self.session(session_id)
        with s.lock:
            return s.sorted_state(), s.goal_reached

    def query_applicable_actions(self, session_id: str | None = None) -> list[Signature]:
        s = self.session(session_id)
        with s.lock:
            task = s.task
            return [task.actions[i].signature for i in task.table.applicable(task.encode(s.current))]

    def execute_single_action(self, session_id: str | None, signature: str | Iterable[str]) -> StepResult:
        s = self.session(session_id)
        sig = coerce_signature(signature)
        with s.lock:
            idx = s.task.index_of.get(sig)
            if idx is None:
                raise UnknownAction(format_signature(sig))
            action = s.task.actions[idx]
            missing = unsatisfied_preconditions(s.current, action)
            if missing:
                s.failed_attempts += 1
                return StepResult(
                    applied=False,
                    state=s.sorted_state(),
                    goal_reached=s.goal_reached,
                    message=f"{format_signature(sig)} is not applicable; unsatisfied preconditions: "
                            + " ".join(str(l) for l in missing),
                    unsatisfied=tuple(missing),
                )
            s.current = apply_action(s.current, action)
            step = len(s.history) + 1
            s.history.append((step, sig))
            reached = s.goal_reached
            msg = f"applied {format_signature(sig)} as step {step}"
            if reached:
                msg += "; all goal conditions are satisfied"
            return StepResult(True, s.sorted_state(), reached, msg, (), step)

    def reset_to_initial_state(self, session_id: str | None = None) -> tuple[tuple[Atom, ...], bool]:
        s = self.session(session_id)
        with s.lock:
            s.current = s.problem.init
            s.history.clear()
            return s.sorted_state(), s.goal_reached

    def query_action_history(self, session_id: str | None = None) -> list[tuple[int, Signature]]:
        s = self.session(session_id)
        with s.lock:
            return list(s.history)

    def validate_complete_plan(self, session_id: str | None, plan: Iterable[str | Iterable[str]]):
        from .validator import validate_plan

        s = self.session(session_id)
        return validate_plan(s.domain, s.problem, [coerce_signature(p) for p in plan], task=s.task)
