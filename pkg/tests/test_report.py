import json
import re

from pddlsim.bench import (RunRecord, compute_metrics, hard_case_analysis, load_published_fixture, render_hard_cases,
                           render_report)
from pddlsim.bench.report import TITLE

FX = load_published_fixture()


def cells(line):
    return re.split(r"\s{2,}", line.strip())


def rows(text):
    return [cells(l) for l in text.splitlines() if l.strip()]


def test_outcome_table():
    rep = compute_metrics(FX["records"], difficulty_key="fd-lama-first", approaches=FX["approaches"])
    text, summary = render_report(rep, FX["labels"])
    assert ["Direct LLM", "65 (63.7%)", "37", "0"] in rows(text)
    assert ["Agentic LLM", "68 (66.7%)", "28", "6"] in rows(text)
    assert ["FD lama-first", "87 (85.3%)", "15", "0"] in rows(text)
    assert summary["outcomes"]["agentic-llm"] == {"solved": 68, "rate": 66.7, "timeout": 28, "early_exit": 6,
                                                  "harness_error": 0, "total": 102}
    assert "Delta" not in text
    assert ["Direct LLM", "2,905,800", "28,488", "44,705", "no"] in rows(text)
    json.dumps(summary)


def test_delta_column_for_two_approaches():
    rep = compute_metrics(FX["records"], approaches=["fd-lama-first", "fd-seq-sat-lama-2011"])
    text, summary = render_report(rep, FX["labels"])
    assert "Delta" in text
    assert ["90-100", "3", "3", "484.0", "374.7", "109.3"] in rows(text)
    assert ["100-102", "0", "0", "---", "---", "---"] in rows(text)
    assert round(summary["blocks"][9]["delta"], 1) == 109.3


def test_co_solved_table_omits_empty_blocks():
    rep = compute_metrics(FX["records"], approaches=FX["approaches"])
    text, summary = render_report(rep)
    co = text.split("co-solved instances only")[1].split("Token cost")[0]
    assert "60-70" not in co and "70-80" in co
    assert summary["co_solved"] == rep.co_solved and len(rep.co_solved) == 49


def test_empty_report_is_header_only():
    text, summary = render_report(compute_metrics([]))
    assert text.splitlines() == [TITLE, "=" * len(TITLE)]
    assert summary["instances"] == 0


def test_harness_error_column_only_when_needed():
    recs = [RunRecord(0, "a", "solved", plan_length=3), RunRecord(0, "b", "harness_error")]
    text, _ = render_report(compute_metrics(recs))
    assert "Harness error" in text and "warning:" in text
    recs = [RunRecord(0, "a", "solved", plan_length=3), RunRecord(0, "b", "timeout")]
    assert "Harness error" not in render_report(compute_metrics(recs))[0]


def test_no_co_solved():
    recs = [RunRecord(0, "a", "solved", plan_length=3), RunRecord(0, "b", "timeout")]
    assert "no instance solved by every approach" in render_report(compute_metrics(recs))[0]


def test_deterministic():
    rep = compute_metrics(FX["records"], approaches=FX["approaches"])
    assert render_report(rep, FX["labels"]) == render_report(rep, FX["labels"])


def test_hard_cases_text():
    h = hard_case_analysis(FX["records"], FX["hard_set"], ["direct-llm", "agentic-llm"])
    text = render_hard_cases(h, FX["labels"])
    assert "Agentic LLM only (vs Direct LLM): [76, 78, 101]" in text
    assert "common: [86]" in text
