"""Suite metrics: success and failure counts, per-block plan lengths, co-solved set, token cost."""

from __future__ import annotations

import logging
import statistics
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .records import RunRecord

log = logging.getLogger(__name__)

FAILURE_MODES = ("timeout", "early_exit")


class NonRectangularGrid(ValueError):
    def __init__(self, missing: Sequence[tuple[int, str]]):
        self.missing = list(missing)
        shown = ", ".join(f"({i}, {a})" for i, a in self.missing[:10])
        more = f" and {len(self.missing) - 10} more" if len(self.missing) > 10 else ""
        super().__init__(f"records do not cover every (instance, approach) pair; missing {shown}{more}")


class UnknownInstance(ValueError):
    def __init__(self, ids: Iterable[int]):
        self.ids = sorted(ids)
        super().__init__(f"unknown instance id(s): {self.ids}")


@dataclass
class ApproachSummary:
    approach: str
    total: int
    solved: int
    timeout: int
    early_exit: int
    harness_error: int

    @property
    def rate(self) -> float:
        return 100.0 * self.solved / self.total if self.total else 0.0

    @property
    def rate_text(self) -> str:
        return f"{self.rate:.1f}%"


@dataclass
class BlockRow:
    lo: int
    hi: int  # exclusive
    n: dict[str, int]
    mean: dict[str, float | None]

    @property
    def label(self) -> str:
        return f"{self.lo}-{self.hi}"

    def delta(self, first: str, second: str) -> float | None:
        a, b = self.mean.get(first), self.mean.get(second)
        return None if a is None or b is None else a - b


@dataclass
class TokenCost:
    total: int
    runs: int
    solved: int
    estimated: bool

    @property
    def per_run(self) -> float | None:
        return self.total / self.runs if self.runs else None

    @property
    def per_solution(self) -> float | None:
        return self.total / self.solved if self.solved else None


@dataclass
class SuiteReport:
    approaches: list[str]
    instances: list[int]
    summaries: dict[str, ApproachSummary]
    blocks: list[BlockRow]
    co_solved: list[int]
    co_blocks: list[BlockRow]
    tokens: dict[str, TokenCost]
    block_size: int
    difficulty_key: str | None
    warnings: list[str] = field(default_factory=list)

    @property
    def empty(self) -> bool:
        return not self.instances


def _mean(values: list[int]) -> float | None:
    return statistics.fmean(values) if values else None


def _blocks(instances: list[int], size: int) -> list[tuple[int, int, list[int]]]:
    """Consecutive position ranges of ``size``; the last may be short.

    Labels use instance ids, so a suite of ids 0..101 ends with block 100-102.
    """
    out = []
    for start in range(0, len(instances), size):
        chunk = instances[start:start + size]
        lo = chunk[0]
        hi = instances[start + size] if start + size < len(instances) else chunk[-1] + 1
        out.append((lo, hi, chunk))
    return out


def _block_rows(blocks, approaches, lengths, keep) -> list[BlockRow]:
    rows = []
    for lo, hi, chunk in blocks:
        n, mean = {}, {}
        for a in approaches:
            vals = [lengths[i, a] for i in chunk if keep(i, a)]
            n[a] = len(vals)
            mean[a] = _mean(vals)
        rows.append(BlockRow(lo, hi, n, mean))
    return rows


def compute_metrics(records: Iterable[RunRecord], block_size: int = 10, difficulty_key: str | None = None,
                    approaches: Sequence[str] | None = None) -> SuiteReport:
    """Aggregate a completed run log.

    ``approaches`` restricts and orders the comparison; by default every
    approach in the log is used in first-seen order. ``difficulty_key``
    names the approach whose plan length is the difficulty proxy; blocks
    follow instance order, which is the proxy ordering of the suite.
    ``harness_error`` rows count towards the grid and the per-approach
    totals but are left out of every plan-length and token metric.
    """
    if block_size < 1:
        raise ValueError("block_size must be positive")
    records = list(records)
    seen: list[str] = []
    for r in records:
        if r.approach not in seen:
            seen.append(r.approach)
    chosen = list(approaches) if approaches is not None else seen
    if difficulty_key is not None and difficulty_key not in chosen and records:
        raise ValueError(f"difficulty_key {difficulty_key!r} is not among the compared approaches")

    grid: dict[tuple[int, str], RunRecord] = {}
    for r in records:
        if r.approach not in chosen:
            continue
        if r.key in grid:
            raise ValueError(f"duplicate record for instance {r.instance}, approach {r.approach}")
        grid[r.key] = r
    instances = sorted({i for i, _ in grid})
    missing = [(i, a) for i in instances for a in chosen if (i, a) not in grid]
    if missing:
        raise NonRectangularGrid(missing)
    if not instances:
        return SuiteReport(chosen if records else [], [], {}, [], [], [], {}, block_size, difficulty_key)

    warnings = []
    errors = sorted(k for k, r in grid.items() if r.status == "harness_error")
    if errors:
        msg = f"{len(errors)} harness_error record(s) excluded from plan-length and token metrics"
        log.warning(msg)
        warnings.append(msg)

    summaries = {}
    for a in chosen:
        rows = [grid[i, a] for i in instances]
        counts = {s: sum(r.status == s for r in rows) for s in ("solved", "timeout", "early_exit", "harness_error")}
        summaries[a] = ApproachSummary(a, len(rows), **counts)

    lengths = {k: r.plan_length for k, r in grid.items() if r.status == "solved"}
    solved_by = {a: {i for i in instances if (i, a) in lengths} for a in chosen}
    co = set.intersection(*solved_by.values())
    blocks = _blocks(instances, block_size)
    all_rows = _block_rows(blocks, chosen, lengths, lambda i, a: i in solved_by[a])
    co_rows = [row for row in _block_rows(blocks, chosen, lengths, lambda i, a: i in co)
               if any(row.n.values())]

    tokens = {}
    for a in chosen:
        rows = [grid[i, a] for i in instances if grid[i, a].status != "harness_error"]
        tokens[a] = TokenCost(sum(r.tokens for r in rows), len(rows), sum(r.status == "solved" for r in rows),
                              any(r.tokens_estimated for r in rows))

    return SuiteReport(chosen, instances, summaries, all_rows, sorted(co), co_rows, tokens, block_size,
                       difficulty_key, warnings)


def token_ratio(report: SuiteReport, numerator: str, denominator: str) -> tuple[float | None, float | None]:
    """(per-run, per-solution) token cost of ``numerator`` relative to ``denominator``."""
    num, den = report.tokens[numerator], report.tokens[denominator]

    def ratio(x, y):
        return x / y if x is not None and y else None

    return ratio(num.per_run, den.per_run), ratio(num.per_solution, den.per_solution)


@dataclass
class HardCaseReport:
    hard_set: list[int]
    solved: dict[str, list[int]]
    unsolved: dict[str, list[int]]
    only: dict[tuple[str, str], list[int]]
    common: list[int]


def hard_case_analysis(records: Iterable[RunRecord], hard_set: Iterable[int],
                       approaches: Sequence[str] | None = None) -> HardCaseReport:
    """Per-approach solved/unsolved partition of ``hard_set`` plus pairwise unique solves.

    ``only[a, b]`` holds the hard instances ``a`` solved and ``b`` did not;
    ``common`` those every approach solved.
    """
    records = list(records)
    hard = sorted(set(hard_set))
    known = {r.instance for r in records}
    unknown = set(hard) - known
    if unknown:
        raise UnknownInstance(unknown)
    chosen = list(approaches) if approaches is not None else list(dict.fromkeys(r.approach for r in records))
    solved_sets = {a: {r.instance for r in records if r.approach == a and r.status == "solved"} & set(hard)
                   for a in chosen}
    only = {(a, b): sorted(solved_sets[a] - solved_sets[b]) for a in chosen for b in chosen if a != b}
    common = sorted(set.intersection(*solved_sets.values())) if chosen else []
    return HardCaseReport(hard, {a: sorted(s) for a, s in solved_sets.items()},
                          {a: sorted(set(hard) - s) for a, s in solved_sets.items()}, only, common)
