"""Planner adapters: oracle search, external planner, direct LLM and agentic LLM.

Every adapter returns an :class:`Outcome`. ``solved`` is only ever
reported after an independent :func:`~pddlsim.validator.validate_plan`
pass over the returned plan.
"""

from __future__ import annotations

import logging
import os
import re
import shlex
import signal
import subprocess
import tempfile
import time
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from string import Template

from .errors import PddlError
from .llm import AuthError, BudgetExceeded, ChatTurn, UsageStats
from .mcp_client import InProcessEndpoint, McpClient
from .mcp_server import TOOL_NAMES, RpcError
from .pddl import Signature, parse_domain, parse_plan, parse_problem, parse_signature
from .search import DEFAULT_NODE_BUDGET, solve_greedy, solve_optimal
from .task import GroundedTask
from .validator import validate_plan

log = logging.getLogger(__name__)

SOLVED = "solved"
TIMEOUT = "timeout"
EARLY_EXIT = "early_exit"

UNSOLVABLE_SENTINEL = "UNSOLVABLE:"
DIRECT_TEMPERATURE = 0.2


class AdapterFault(Exception):
    """The adapter itself misbehaved (bad planner output, broken setup).

    Never a planning outcome; the harness records it as ``harness_error``.
    """


@dataclass
class Outcome:
    status: str
    plan: list[Signature] | None = None
    wall_time: float = 0.0
    tokens_in: int = 0
    tokens_out: int = 0
    attempts: int = 0
    failed_action_attempts: int = 0
    tokens_estimated: bool = False
    detail: str = ""

    @property
    def plan_length(self) -> int | None:
        return len(self.plan) if self.status == SOLVED and self.plan is not None else None


def load_prompt(name: str) -> Template:
    text = resources.files("pddlsim.prompts").joinpath(f"{name}.txt").read_text(encoding="utf-8")
    body = "\n".join(l for l in text.splitlines() if not l.startswith("# prompt:"))
    return Template(body.strip("\n"))


def _task(domain_text: str, problem_text: str) -> GroundedTask:
    domain = parse_domain(domain_text)
    return GroundedTask(domain, parse_problem(problem_text, domain))


def _checked_outcome(task: GroundedTask, plan: list[Signature], **kw) -> Outcome:
    try:
        report = validate_plan(task.domain, task.problem, plan, task=task)
    except PddlError as exc:
        raise AdapterFault(f"returned plan does not validate: {exc}") from None
    if not report.valid:
        raise AdapterFault(f"returned plan does not validate: {report.message}")
    return Outcome(SOLVED, plan, **kw)


# ---------------------------------------------------------------------------
# Oracle search
# ---------------------------------------------------------------------------


def solve_oracle(domain_text: str, problem_text: str, budget: float, optimal: bool = True,
                 node_budget: int = DEFAULT_NODE_BUDGET) -> Outcome:
    start = time.monotonic()
    task = _task(domain_text, problem_text)
    search = solve_optimal if optimal else solve_greedy
    result = search(task, node_budget=node_budget, deadline=start + budget)
    wall = time.monotonic() - start
    if result.plan is None:
        detail = "search budget exhausted" if result.exhausted else "goal unreachable"
        return Outcome(TIMEOUT, None, wall, attempts=1, detail=detail)
    return _checked_outcome(task, result.plan, wall_time=wall, attempts=1)


# ---------------------------------------------------------------------------
# External planner subprocess
# ---------------------------------------------------------------------------


def _plan_files(plan_out: Path) -> list[Path]:
    numbered = []
    for p in plan_out.parent.glob(plan_out.name + ".*"):
        suffix = p.name[len(plan_out.name) + 1:]
        if suffix.isdigit():
            numbered.append((int(suffix), p))
    files = [p for _, p in sorted(numbered)]
    if not files and plan_out.exists():
        files = [plan_out]
    return files


def solve_external(command: str, domain_file: str | Path, problem_file: str | Path, budget: float,
                   workdir: str | Path | None = None) -> Outcome:
    """Run an external planner under a wall-clock budget.

    ``command`` is a shell-style template with ``{domain}``, ``{problem}``
    and ``{plan_out}`` placeholders. Anytime planners writing ``plan_out.1``,
    ``plan_out.2``, ... are supported: the last complete plan is taken.
    """
    domain_file, problem_file = Path(domain_file).resolve(), Path(problem_file).resolve()
    task = _task(domain_file.read_text(encoding="utf-8"), problem_file.read_text(encoding="utf-8"))
    with tempfile.TemporaryDirectory(dir=workdir) as tmp:
        plan_out = Path(tmp) / "plan"
        subst = {"{domain}": str(domain_file), "{problem}": str(problem_file), "{plan_out}": str(plan_out)}
        argv = []
        for tok in shlex.split(command):
            for k, v in subst.items():
                tok = tok.replace(k, v)
            argv.append(tok)
        start = time.monotonic()
        try:
            proc = subprocess.Popen(argv, cwd=tmp, stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL,
                                    start_new_session=True)
        except OSError as exc:
            raise AdapterFault(f"cannot start planner: {exc}") from None
        killed = False
        try:
            rc = proc.wait(timeout=budget)
        except subprocess.TimeoutExpired:
            killed = True
            try:
                os.killpg(proc.pid, signal.SIGKILL)
            except ProcessLookupError:
                pass
            rc = proc.wait()
        wall = time.monotonic() - start

        files = _plan_files(plan_out)
        plan = None
        for i, path in enumerate(reversed(files)):
            try:
                plan = parse_plan(path.read_text(encoding="utf-8"))
                break
            except PddlError as exc:
                if killed and i == 0:
                    continue  # interrupted mid-write; fall back to the previous plan
                raise AdapterFault(f"unparsable plan file {path.name}: {exc}") from None
        if plan is None:
            detail = "budget exhausted" if killed else f"planner exited with code {rc} and no plan"
            return Outcome(TIMEOUT, None, wall, attempts=1, detail=detail)
        return _checked_outcome(task, plan, wall_time=wall, attempts=1,
                                detail=f"{len(files)} plan file(s){' (killed at budget)' if killed else ''}")


# ---------------------------------------------------------------------------
# Direct LLM: generate, validate, retry from scratch
# ---------------------------------------------------------------------------

_FENCE = re.compile(r"```[^\n]*\n(.*?)```", re.DOTALL)


def extract_plan(text: str) -> list[Signature]:
    """Plan from the last fenced block of a model reply; prose outside it is ignored."""
    blocks = _FENCE.findall(text)
    if blocks:
        body = blocks[-1]
    else:
        body = "\n".join(l for l in text.splitlines() if l.strip().startswith("("))
    return parse_plan(body)


def solve_direct(llm, domain_text: str, problem_text: str, budget: float,
                 temperature: float = DIRECT_TEMPERATURE) -> Outcome:
    start = time.monotonic()
    deadline = start + budget
    task = _task(domain_text, problem_text)
    system = load_prompt("direct_system").substitute()
    user = load_prompt("direct_user").substitute(domain=domain_text.strip(), problem=problem_text.strip())
    usage = UsageStats()
    attempts = 0

    def outcome(status: str, plan=None, detail: str = "") -> Outcome:
        return Outcome(status, plan, time.monotonic() - start, usage.input_tokens, usage.output_tokens,
                       attempts, 0, usage.estimated, detail)

    while time.monotonic() < deadline:
        # a fresh context every attempt: no feedback carries over
        messages = [ChatTurn("system", system), ChatTurn("user", user)]
        try:
            turn, used = llm.complete(messages, temperature=temperature, deadline=deadline)
        except BudgetExceeded:
            break
        attempts += 1
        usage = usage + used
        try:
            plan = extract_plan(turn.content)
            report = validate_plan(task.domain, task.problem, plan, task=task)
        except PddlError as exc:
            log.debug("attempt %d unusable: %s", attempts, exc)
            continue
        if report.valid:
            return outcome(SOLVED, plan)
        log.debug("attempt %d invalid: %s", attempts, report.message)
    return outcome(TIMEOUT, detail=f"no valid plan in {attempts} attempt(s)")


# ---------------------------------------------------------------------------
# Agentic LLM: tool loop against the simulator
# ---------------------------------------------------------------------------

_NUDGE = ("Continue by calling the tools. When the goal is reached, validate the executed plan with "
          f"validate_complete_plan; if the problem cannot be solved, reply starting with {UNSOLVABLE_SENTINEL}")


def _result_text(result: dict) -> str:
    return "".join(c.get("text", "") for c in result.get("content", []) if c.get("type") == "text")


def solve_agentic(llm, endpoint, domain_text: str, problem_text: str, budget: float) -> Outcome:
    """Let the model drive the simulator through the seven tools until the plan validates."""
    start = time.monotonic()
    deadline = start + budget
    task = _task(domain_text, problem_text)
    client = McpClient(endpoint if endpoint is not None else InProcessEndpoint())
    usage = UsageStats()
    attempts = 1
    failed = 0

    def outcome(status: str, plan=None, detail: str = "") -> Outcome:
        return Outcome(status, plan, time.monotonic() - start, usage.input_tokens, usage.output_tokens,
                       attempts, failed, usage.estimated, detail)

    try:
        client.initialize()
        tools = client.list_tools()
        init = client.call_tool("initialise_session", {"domain": domain_text, "problem": problem_text})
    except (RpcError, OSError) as exc:
        raise AdapterFault(f"tool server unavailable: {exc}") from None
    if init.get("isError"):
        raise AdapterFault(f"session initialisation failed: {_result_text(init)}")
    sid = init["structuredContent"]["session_id"]

    messages = [
        ChatTurn("system", load_prompt("agentic_system").substitute()),
        ChatTurn("user", load_prompt("agentic_user").substitute(
            session_id=sid, domain=domain_text.strip(), problem=problem_text.strip())),
    ]
    while time.monotonic() < deadline:
        try:
            turn, used = llm.complete(messages, tools=tools, deadline=deadline)
        except BudgetExceeded:
            break
        except AuthError:
            raise
        usage = usage + used
        messages.append(turn)
        if not turn.tool_calls:
            if turn.content.lstrip().startswith(UNSOLVABLE_SENTINEL):
                return outcome(EARLY_EXIT, detail=turn.content.strip()[:200])
            messages.append(ChatTurn("user", _NUDGE))
            continue

        note = None
        for tc in turn.tool_calls:
            if tc.name not in TOOL_NAMES or not isinstance(tc.arguments, dict):
                why = f"unknown tool {tc.name!r}" if tc.name not in TOOL_NAMES else "arguments must be a JSON object"
                messages.append(ChatTurn("tool", f"error: {why}", tool_call_id=tc.id, name=tc.name))
                continue
            args = dict(tc.arguments)
            args["session_id"] = sid
            try:
                result = client.call_tool(tc.name, args)
            except RpcError as exc:
                messages.append(ChatTurn("tool", f"error {exc.code}: {exc.message}", tool_call_id=tc.id,
                                         name=tc.name))
                continue
            messages.append(ChatTurn("tool", _result_text(result), tool_call_id=tc.id, name=tc.name))
            if result.get("isError"):
                continue
            data = result["structuredContent"]
            if tc.name == "execute_single_action" and not data["applied"]:
                failed += 1
            elif tc.name == "reset_to_initial_state":
                attempts += 1
            elif tc.name == "validate_complete_plan" and data["valid"]:
                history = client.call_tool("query_action_history", {"session_id": sid})["structuredContent"]
                plan = [parse_signature(h["action"]) for h in history["history"]]
                report = validate_plan(task.domain, task.problem, plan, task=task)
                if report.valid:
                    return outcome(SOLVED, plan)
                note = ("The submitted plan is valid, but the executed history does not reach the goal. "
                        "Execute the actions with execute_single_action, then validate the history.")
        if note:
            messages.append(ChatTurn("user", note))
    return outcome(TIMEOUT, detail="budget exhausted")
