"""Exit criteria. Each test carries an ``acceptance`` marker and is listed
PASS/FAIL in the terminal summary."""

import json
import random
import re
import time

import pytest

from oracles import applicable_set, bfs_length, replay, successor
from pddlsim import blocksworld as bw
from pddlsim.adapters import SOLVED, TIMEOUT, solve_agentic
from pddlsim.bench import (RunRecord, compute_metrics, hard_case_analysis, load_published_fixture, render_report,
                           run_one, token_ratio)
from pddlsim.bench.records import Instance
from pddlsim.engine import Engine
from pddlsim.grounding import ground
from pddlsim.llm import ChatTurn, ScriptedClient, ToolCall
from pddlsim.mcp_client import McpClient, StdioEndpoint
from pddlsim.mcp_server import TOOL_NAMES
from pddlsim.pddl import format_signature, parse_domain, parse_problem
from pddlsim.search import solve_greedy, solve_optimal
from pddlsim.validator import validate_plan

from conftest import random_tasks

TOOL_ORDER = ["initialise_session", "query_current_state", "query_applicable_actions", "execute_single_action",
              "reset_to_initial_state", "query_action_history", "validate_complete_plan"]


@pytest.fixture(scope="module")
def hundred():
    return random_tasks(100, seed=7)


@pytest.mark.acceptance("semantics vs oracle: 100 random instances solved, validated and replayed")
def test_semantics_vs_oracle(hundred):
    start = time.monotonic()
    engine = Engine()
    for domain, problem, text in hundred:
        result = solve_optimal(domain, problem)
        assert result.solved
        assert validate_plan(domain, problem, result.plan).valid
        summary = engine.initialise_session(bw.domain_text(), text)
        sid = summary.session_id
        for sig in result.plan:
            assert engine.execute_single_action(sid, sig).applied
        assert engine.query_current_state(sid)[1] is True
        assert [s for _, s in engine.query_action_history(sid)] == result.plan
        # optimality against an independent set-based BFS
        assert len(result.plan) == bfs_length(domain, problem)
        engine.close_session(sid)
    assert time.monotonic() - start < 60


@pytest.mark.acceptance("applicable-action completeness: 1000 random-walk states vs brute force")
def test_applicable_action_completeness(hundred):
    rng = random.Random(11)
    engine = Engine()
    checked = 0
    for domain, problem, text in hundred:
        sid = engine.initialise_session(bw.domain_text(), text).session_id
        state = frozenset(problem.init)
        for _ in range(10):
            expected = applicable_set(domain, problem, state)
            got = engine.query_applicable_actions(sid)
            assert set(got) == expected and len(got) == len(expected)
            checked += 1
            sig = rng.choice(sorted(expected))
            assert engine.execute_single_action(sid, sig).applied
            state = successor(domain, state, sig)
            assert frozenset(engine.query_current_state(sid)[0]) == state
        engine.close_session(sid)
    assert checked == 1000


def _corrupt(plan, rng):
    plan = list(plan)
    if len(plan) >= 2 and rng.random() < 0.5:
        i = rng.randrange(len(plan) - 1)
        plan[i], plan[i + 1] = plan[i + 1], plan[i]
    elif plan:
        del plan[rng.randrange(len(plan))]
    return plan


@pytest.mark.acceptance("validator/engine agreement: 500 valid and corrupted plans")
def test_validator_engine_agreement(hundred):
    rng = random.Random(5)
    plans = {}
    for domain, problem, text in hundred:
        plans[problem.name] = solve_optimal(domain, problem).plan
    engine = Engine()
    corrupted = 0
    for k in range(500):
        domain, problem, text = hundred[k % len(hundred)]
        plan = plans[problem.name]
        if k % 2:
            plan = _corrupt(plan, rng)
            corrupted += 1
        report = validate_plan(domain, problem, plan)
        sid = engine.initialise_session(bw.domain_text(), text).session_id
        applied = 0
        for sig in plan:
            if not engine.execute_single_action(sid, sig).applied:
                break
            applied += 1
        state, reached = engine.query_current_state(sid)
        engine.close_session(sid)
        assert report.steps_applied == applied
        assert report.final_state == frozenset(state)
        assert report.goal_satisfied == reached
        # and both agree with the schema-level reference replay
        assert (applied, frozenset(state), reached) == replay(domain, problem, plan)
    assert corrupted == 250


@pytest.mark.acceptance("Sussman anomaly: optimal 6, greedy valid and >= 6, under 1 s")
def test_sussman(bw_domain, sussman):
    start = time.monotonic()
    opt = solve_optimal(bw_domain, sussman)
    greedy = solve_greedy(bw_domain, sussman)
    elapsed = time.monotonic() - start
    assert len(opt.plan) == 6 == bfs_length(bw_domain, sussman)
    assert validate_plan(bw_domain, sussman, greedy.plan).valid
    assert len(greedy.plan) >= 6
    assert elapsed < 1.0


@pytest.mark.acceptance("grounding count: 3-block Blocksworld grounds to 24 actions")
def test_grounding_count(bw_domain, sussman):
    n = len(sussman.objects)
    assert n == 3
    assert len(ground(bw_domain, sussman)) == 2 * n + 2 * n * n == 24


def _scripted_agent(plan):
    """Tool calls a careful agent would make, ending with plan validation."""
    turns = [ChatTurn("assistant", "", [ToolCall("c1", "query_current_state", {})]),
             ChatTurn("assistant", "", [ToolCall("c2", "query_applicable_actions", {})])]
    for k, sig in enumerate(plan):
        turns.append(ChatTurn("assistant", "", [ToolCall(f"x{k}", "execute_single_action",
                                                         {"action": format_signature(sig)})]))
    turns.append(ChatTurn("assistant", "", [ToolCall("h", "query_action_history", {})]))
    turns.append(ChatTurn("assistant", "", [ToolCall("v", "validate_complete_plan",
                                                     {"plan": [format_signature(s) for s in plan]})]))
    return turns


@pytest.mark.acceptance("MCP end-to-end: scripted agent over stdio, 7 tools, byte-identical replay")
def test_mcp_end_to_end(bw_domain_text):
    rng = random.Random(3)
    problem_text = bw.random_problem(3, rng, "e2e")
    domain = parse_domain(bw_domain_text)
    plan = solve_optimal(domain, parse_problem(problem_text, domain)).plan
    assert plan

    with StdioEndpoint() as endpoint:
        tools = McpClient(endpoint).request("tools/list")["tools"]
        assert [t["name"] for t in tools] == TOOL_ORDER == list(TOOL_NAMES)
        llm = ScriptedClient(_scripted_agent(plan))
        outcome = solve_agentic(llm, endpoint, bw_domain_text, problem_text, budget=30)
        transcript = list(endpoint.transcript)
    assert outcome.status == SOLVED
    assert outcome.plan == plan
    assert outcome.failed_action_attempts == 0

    for request, _ in transcript:
        msg = json.loads(request)
        assert msg["method"] in ("tools/list", "initialize", "notifications/initialized", "tools/call")
        if msg["method"] == "tools/call":
            assert msg["params"]["name"] in TOOL_ORDER

    with StdioEndpoint() as replay_endpoint:
        for request, response in transcript:
            assert replay_endpoint.exchange(request) == response


@pytest.mark.acceptance("metric pipeline reproduces the published outcome tables")
def test_metric_pipeline_reproduction():
    fx = load_published_fixture()
    records = fx["records"]
    report = compute_metrics(records, difficulty_key=fx["difficulty_key"], approaches=fx["approaches"])
    rows = {a: (s.solved, f"{s.rate:.1f}", s.timeout, s.early_exit) for a, s in report.summaries.items()}
    assert rows == {
        "fd-lama-first": (87, "85.3", 15, 0),
        "fd-seq-sat-lama-2011": (87, "85.3", 15, 0),
        "direct-llm": (65, "63.7", 37, 0),
        "agentic-llm": (68, "66.7", 28, 6),
    }
    per_run, per_solution = token_ratio(report, "agentic-llm", "direct-llm")
    assert per_run == pytest.approx(5.97, abs=0.05)
    assert per_solution == pytest.approx(5.7, abs=0.05)
    assert round(report.tokens["direct-llm"].per_solution) == 44_705
    assert round(report.tokens["agentic-llm"].per_solution) == 254_796

    hard = hard_case_analysis(records, fx["hard_set"], ["direct-llm", "agentic-llm"])
    assert hard.only["agentic-llm", "direct-llm"] == [76, 78, 101]
    assert hard.only["direct-llm", "agentic-llm"] == [100]
    assert hard.common == [86]

    text, _ = render_report(report, fx["labels"])
    # cells are separated by two or more spaces
    assert "Direct LLM  65 (63.7%)  37  0" in {"  ".join(re.split(r"\s{2,}", l.strip())) for l in text.splitlines()}


class _Hang:
    def __call__(self, instance, budget):
        while True:
            time.sleep(0.05)


@pytest.mark.acceptance("budget enforcement: non-terminating adapter times out at 2 s")
def test_budget_enforcement(tmp_path):
    (tmp_path / "d.pddl").write_text(bw.domain_text())
    (tmp_path / "p.pddl").write_text(bw.sussman_text())
    inst = Instance(0, "sussman", tmp_path / "d.pddl", tmp_path / "p.pddl")
    record = run_one(inst, "hang", _Hang(), budget=2.0)
    assert isinstance(record, RunRecord)
    assert record.status == TIMEOUT
    assert record.plan_length is None
    assert 2.0 <= record.wall_time_s <= 3.0
