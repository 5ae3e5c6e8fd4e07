"""Benchmark harness: run logs, the suite runner, metrics and report rendering."""

from .harness import make_adapters, run_one, run_suite
from .metrics import (HardCaseReport, NonRectangularGrid, SuiteReport, UnknownInstance, compute_metrics,
                      hard_case_analysis, token_ratio)
from .records import Instance, RunLog, RunRecord, load_manifest, load_published_fixture, write_records
from .report import render_hard_cases, render_report

__all__ = [
    "HardCaseReport", "Instance", "NonRectangularGrid", "RunLog", "RunRecord", "SuiteReport", "UnknownInstance",
    "compute_metrics", "hard_case_analysis", "load_manifest", "load_published_fixture", "make_adapters",
    "render_hard_cases", "render_report", "run_one", "run_suite", "token_ratio", "write_records",
]
