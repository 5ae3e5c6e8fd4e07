import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from pddlsim.bench import (NonRectangularGrid, RunRecord, UnknownInstance, compute_metrics, hard_case_analysis,
                           load_published_fixture, token_ratio)
from pddlsim.bench.metrics import _blocks

FX = load_published_fixture()
APPROACHES = FX["approaches"]


def rec(i, a, status, length=None, tokens=0):
    return RunRecord(i, a, status, plan_length=length, tokens_in=tokens)


def test_fixture_is_labelled_as_transcribed():
    assert "not runs performed by this package" in FX["description"]
    assert len(FX["records"]) == 102 * 4
    kinds = {r.extra["cell_source"]["status"] for r in FX["records"]}
    assert kinds == {"exact", "inferred"}
    early = sorted(r.instance for r in FX["records"] if r.status == "early_exit")
    assert early == [32, 88, 89, 96, 98, 100]
    assert all(r.extra["cell_source"]["status"] == "exact" for r in FX["records"] if r.status == "early_exit")


def test_fixture_outcome_table():
    rep = compute_metrics(FX["records"], difficulty_key="fd-lama-first", approaches=APPROACHES)
    got = [(s.solved, round(s.rate, 1), s.timeout, s.early_exit, s.harness_error) for s in rep.summaries.values()]
    assert got == [(87, 85.3, 15, 0, 0), (87, 85.3, 15, 0, 0), (65, 63.7, 37, 0, 0), (68, 66.7, 28, 6, 0)]
    assert len(rep.co_solved) == 49


def test_fixture_token_costs():
    rep = compute_metrics(FX["records"], approaches=APPROACHES)
    d, a = rep.tokens["direct-llm"], rep.tokens["agentic-llm"]
    assert (round(d.per_run), round(d.per_solution)) == (28_488, 44_705)
    assert (round(a.per_run), round(a.per_solution)) == (169_864, 254_796)
    per_run, per_solution = token_ratio(rep, "agentic-llm", "direct-llm")
    assert round(per_solution, 1) == 5.7
    assert abs(per_run - 5.97) <= 0.05
    assert token_ratio(rep, "direct-llm", "fd-lama-first") == (None, None)


def test_fixture_block_means():
    rep = compute_metrics(FX["records"], approaches=["fd-lama-first", "fd-seq-sat-lama-2011"])
    last_full = rep.blocks[9]
    assert last_full.label == "90-100"
    assert last_full.n == {"fd-lama-first": 3, "fd-seq-sat-lama-2011": 3}
    assert round(last_full.mean["fd-lama-first"], 1) == 484.0
    assert round(last_full.mean["fd-seq-sat-lama-2011"], 1) == 374.7
    # computed from unrounded means, then rounded
    assert round(last_full.delta("fd-lama-first", "fd-seq-sat-lama-2011"), 1) == 109.3
    assert rep.blocks[-1].label == "100-102"
    assert rep.blocks[-1].mean["fd-lama-first"] is None


def test_fixture_block_solve_counts():
    rep = compute_metrics(FX["records"], approaches=APPROACHES)
    row = next(b for b in rep.blocks if b.label == "80-90")
    assert (row.n["agentic-llm"], row.n["direct-llm"]) == (2, 5)
    assert rep.co_blocks[0].n == {a: 10 for a in APPROACHES}


def test_fixture_hard_cases():
    h = hard_case_analysis(FX["records"], FX["hard_set"], ["direct-llm", "agentic-llm"])
    assert h.only["agentic-llm", "direct-llm"] == [76, 78, 101]
    assert h.only["direct-llm", "agentic-llm"] == [100]
    assert h.common == [86]
    assert h.solved["agentic-llm"] == [76, 78, 86, 101]
    assert len(h.unsolved["direct-llm"]) == 13
    everyone = hard_case_analysis(FX["records"], FX["hard_set"], APPROACHES)
    assert everyone.solved["fd-lama-first"] == [] and everyone.common == []


def test_hard_case_edges():
    recs = [rec(i, a, "timeout") for i in range(3) for a in "xy"]
    h = hard_case_analysis(recs, [], ["x", "y"])
    assert h.solved == {"x": [], "y": []} and h.common == [] and all(v == [] for v in h.only.values())
    h = hard_case_analysis(recs, [0, 2], ["x", "y"])
    assert h.solved == {"x": [], "y": []} and h.unsolved == {"x": [0, 2], "y": [0, 2]}
    with pytest.raises(UnknownInstance) as exc:
        hard_case_analysis(recs, [1, 7, 9])
    assert exc.value.ids == [7, 9]


def test_all_solved_grid():
    recs = [rec(i, a, "solved", i + 1) for i in range(25) for a in ("p", "q")]
    rep = compute_metrics(recs)
    assert rep.co_solved == list(range(25))
    assert all(s.rate == 100.0 and s.rate_text == "100.0%" for s in rep.summaries.values())
    assert [b.label for b in rep.blocks] == ["0-10", "10-20", "20-25"]


def test_non_rectangular():
    recs = [rec(0, "a", "timeout"), rec(0, "b", "timeout"), rec(1, "a", "timeout")]
    with pytest.raises(NonRectangularGrid) as exc:
        compute_metrics(recs)
    assert exc.value.missing == [(1, "b")]
    assert "(1, b)" in str(exc.value)


def test_duplicates_rejected():
    with pytest.raises(ValueError, match="duplicate"):
        compute_metrics([rec(0, "a", "timeout"), rec(0, "a", "timeout")])


def test_harness_errors_counted_but_excluded(caplog):
    recs = [rec(0, "a", "solved", 4, tokens=100), rec(1, "a", "harness_error", tokens=999),
            rec(0, "b", "solved", 6, tokens=10), rec(1, "b", "timeout", tokens=10)]
    rep = compute_metrics(recs)
    s = rep.summaries["a"]
    assert (s.total, s.solved, s.harness_error) == (2, 1, 1)
    assert rep.tokens["a"].total == 100 and rep.tokens["a"].runs == 1
    assert rep.warnings and "harness_error" in caplog.text


def test_difficulty_key_must_be_compared():
    with pytest.raises(ValueError):
        compute_metrics([rec(0, "a", "timeout")], difficulty_key="zzz")


def test_empty():
    rep = compute_metrics([])
    assert rep.empty and rep.summaries == {} and rep.blocks == []


def test_approach_subset_and_order():
    rep = compute_metrics(FX["records"], approaches=["agentic-llm", "direct-llm"])
    assert list(rep.summaries) == ["agentic-llm", "direct-llm"]


def test_survivorship_guard():
    base = compute_metrics(FX["records"], approaches=APPROACHES)
    extra = [rec(102, "fd-lama-first", "solved", 5000)] + [rec(102, a, "timeout") for a in APPROACHES[1:]]
    grown = compute_metrics(FX["records"] + extra, approaches=APPROACHES)
    assert grown.co_solved == base.co_solved
    assert [(b.label, b.mean) for b in grown.co_blocks] == [(b.label, b.mean) for b in base.co_blocks]
    assert grown.blocks[-1].mean["fd-lama-first"] == 5000  # the all-solved table does see it


grid = st.integers(1, 40).flatmap(lambda n: st.tuples(
    st.just(n), st.lists(st.sampled_from(["solved", "timeout", "early_exit", "harness_error"]),
                         min_size=3 * n, max_size=3 * n)))


@settings(max_examples=100, deadline=None)
@given(grid, st.integers(1, 12))
def test_counting_identity_and_partition(case, size):
    n, statuses = case
    recs = [rec(i, a, statuses[3 * i + k], 10 + i if statuses[3 * i + k] == "solved" else None)
            for i in range(n) for k, a in enumerate("xyz")]
    rep = compute_metrics(recs, block_size=size)
    for s in rep.summaries.values():
        assert s.solved + s.timeout + s.early_exit + s.harness_error == s.total == n
    covered = [i for lo, hi, chunk in _blocks(rep.instances, size) for i in chunk]
    assert covered == list(range(n))
    assert [b.label for b in rep.blocks][0].startswith("0-")
    solved = {a: {r.instance for r in recs if r.approach == a and r.status == "solved"} for a in "xyz"}
    assert rep.co_solved == sorted(set.intersection(*solved.values()))
    for b in rep.co_blocks:
        assert len({b.n[a] for a in "xyz"}) == 1


def test_block_labels_follow_instance_ids():
    ids = [5, 6, 7, 8, 9]
    assert [(lo, hi) for lo, hi, _ in _blocks(ids, 2)] == [(5, 7), (7, 9), (9, 10)]


def test_fixture_direct_attempt_medians():
    from statistics import median
    direct = [r for r in FX["records"] if r.approach == "direct-llm"]
    assert median(r.attempts for r in direct if r.status == "solved") == 2
    assert median(r.attempts for r in direct if r.status != "solved") == 15
