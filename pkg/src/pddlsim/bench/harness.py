"""Run every (instance, adapter) pair once under a wall-clock budget, logging as it goes."""

from __future__ import annotations

import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Iterator, Mapping, Sequence

from ..adapters import SOLVED, TIMEOUT, AdapterFault, Outcome
from ..errors import PddlError
from ..pddl import format_signature, parse_domain, parse_problem
from ..validator import validate_plan
from .records import Instance, RunLog, RunRecord, now_iso

log = logging.getLogger(__name__)

Adapter = Callable[[Instance, float], Outcome]

DEFAULT_BUDGET = 180.0
DEFAULT_GRACE = 0.5


def _call_with_deadline(fn: Adapter, instance: Instance, budget: float, grace: float):
    """Run ``fn`` in a daemon thread; returns (outcome | exception | None, elapsed)."""
    box: list = []

    def target():
        try:
            box.append(fn(instance, budget))
        except BaseException as exc:  # reported, never raised into the harness
            box.append(exc)

    start = time.monotonic()
    worker = threading.Thread(target=target, name=f"adapter-{instance.index}", daemon=True)
    worker.start()
    worker.join(budget + grace)
    elapsed = time.monotonic() - start
    return (box[0] if box else None), elapsed


def _revalidate(instance: Instance, outcome: Outcome) -> str | None:
    """Problem with a claimed solution, or None when the plan checks out."""
    if outcome.plan is None:
        return "solved outcome without a plan"
    try:
        domain = parse_domain(instance.domain_text)
        problem = parse_problem(instance.problem_text, domain)
        report = validate_plan(domain, problem, outcome.plan)
    except (PddlError, OSError) as exc:
        return f"cannot re-validate plan: {exc}"
    return None if report.valid else f"plan rejected on re-validation: {report.message}"


def run_one(instance: Instance, approach: str, adapter: Adapter, budget: float,
            grace: float = DEFAULT_GRACE) -> RunRecord:
    result, elapsed = _call_with_deadline(adapter, instance, budget, grace)
    base = dict(instance=instance.index, instance_name=instance.name, approach=approach,
                wall_time_s=round(elapsed, 3), timestamp=now_iso())
    if result is None:
        return RunRecord(status=TIMEOUT, attempts=0, detail="adapter did not return within the budget", **base)
    if isinstance(result, BaseException):
        kind = "adapter fault" if isinstance(result, AdapterFault) else type(result).__name__
        log.warning("%s on instance %s: %s", approach, instance.name, result)
        return RunRecord(status="harness_error", detail=f"{kind}: {result}", **base)
    outcome: Outcome = result
    usage = dict(tokens_in=outcome.tokens_in, tokens_out=outcome.tokens_out, attempts=outcome.attempts,
                 failed_action_attempts=outcome.failed_action_attempts,
                 tokens_estimated=outcome.tokens_estimated)
    status, detail = outcome.status, outcome.detail
    if status == SOLVED:
        problem = _revalidate(instance, outcome)
        if problem:
            return RunRecord(status="harness_error", detail=problem, **usage, **base)
        if elapsed > budget + grace:
            status, detail = TIMEOUT, f"plan found after the budget ({elapsed:.1f} s)"
    if status == SOLVED:
        return RunRecord(status=status, plan_length=len(outcome.plan), detail=detail,
                         plan=[format_signature(s) for s in outcome.plan], **usage, **base)
    return RunRecord(status=status, detail=detail, **usage, **base)


def run_suite(instances: Sequence[Instance], adapters: Mapping[str, Adapter], budget: float = DEFAULT_BUDGET,
              parallelism: int = 1, log_path: str | Path | None = None,
              grace: float = DEFAULT_GRACE) -> Iterator[RunRecord]:
    """Yield one record per (instance, adapter) pair, in instance order.

    Each record is appended to ``log_path`` before it is yielded. Pairs
    already present in the log are skipped, so an interrupted suite resumes
    where it stopped. With ``parallelism > 1`` runs overlap, but records
    are still written in instance order.
    """
    if not instances:
        raise ValueError("no instances to run")
    if not adapters:
        raise ValueError("no adapters selected")
    if budget <= 0:
        raise ValueError("budget must be positive")
    runlog = RunLog(log_path) if log_path is not None else None
    done = {r.key for r in runlog.load()} if runlog else set()
    todo = [(inst, name) for inst in instances for name in adapters if (inst.index, name) not in done]
    if done:
        log.info("resuming: %d pair(s) already logged, %d to run", len(done), len(todo))

    def job(pair):
        inst, name = pair
        return run_one(inst, name, adapters[name], budget, grace)

    with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
        # submit lazily so at most `parallelism` runs are ahead of the log
        pending = []
        it = iter(todo)
        for pair in it:
            pending.append(pool.submit(job, pair))
            if len(pending) >= max(1, parallelism):
                break
        while pending:
            record = pending.pop(0).result()
            if runlog:
                runlog.append(record)
            nxt = next(it, None)
            if nxt is not None:
                pending.append(pool.submit(job, nxt))
            yield record


# ---------------------------------------------------------------------------
# Named adapters
# ---------------------------------------------------------------------------

BUILTIN_ADAPTERS = ("oracle", "greedy", "direct", "agentic")


def make_adapters(names: Sequence[str], config=None, llm_factory: Callable[[], object] | None = None
                  ) -> dict[str, Adapter]:
    """Map adapter names to callables.

    ``oracle`` and ``greedy`` are the built-in searches, ``direct`` and
    ``agentic`` use the configured LLM (a fresh client per run, from
    ``llm_factory`` if given), and any ``[planners]`` entry of the config
    runs that external command.
    """
    from .. import adapters as ad
    from ..config import Config
    from ..llm import HttpChatClient

    config = config or Config()
    if llm_factory is None and any(n in ("direct", "agentic") for n in names):
        config.check_llm()
        c = config.llm

        def llm_factory():
            return HttpChatClient(c.provider, c.base_url, c.model, c.api_key_env,
                                  request_timeout=c.request_timeout, max_retries=c.max_retries)

    out: dict[str, Adapter] = {}
    for name in names:
        if name in out:
            raise ValueError(f"adapter {name!r} listed twice")
        if name in ("oracle", "greedy"):
            optimal = name == "oracle"
            out[name] = lambda inst, budget, optimal=optimal: ad.solve_oracle(
                inst.domain_text, inst.problem_text, budget, optimal=optimal)
        elif name == "direct":
            out[name] = lambda inst, budget: ad.solve_direct(llm_factory(), inst.domain_text,
                                                             inst.problem_text, budget)
        elif name == "agentic":
            out[name] = lambda inst, budget: ad.solve_agentic(llm_factory(), None, inst.domain_text,
                                                              inst.problem_text, budget)
        elif name in config.planners:
            out[name] = lambda inst, budget, cmd=config.planners[name]: ad.solve_external(
                cmd, inst.domain_path, inst.problem_path, budget)
        else:
            known = [*BUILTIN_ADAPTERS, *config.planners]
            raise ValueError(f"unknown adapter {name!r}; known: {', '.join(known)}")
    return out
