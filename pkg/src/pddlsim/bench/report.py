"""Plain-text tables and a JSON-ready summary of a :class:`SuiteReport`."""

from __future__ import annotations

from typing import Mapping, Sequence

from .metrics import BlockRow, SuiteReport

TITLE = "Benchmark report"
EMPTY_CELL = "---"


def _table(header: Sequence[str], rows: Sequence[Sequence[str]]) -> list[str]:
    widths = [max(len(str(r[c])) for r in [header, *rows]) for c in range(len(header))]
    lines = []
    for k, row in enumerate([header, *rows]):
        cells = [str(v).ljust(w) if c == 0 else str(v).rjust(w) for c, (v, w) in enumerate(zip(row, widths))]
        lines.append("  ".join(cells).rstrip())
        if k == 0:
            lines.append("  ".join("-" * w for w in widths))
    return lines


def _fmt(x: float | None, digits: int = 1) -> str:
    return EMPTY_CELL if x is None else f"{x:,.{digits}f}"


def _block_table(rows: list[BlockRow], approaches: list[str], names: list[str]) -> list[str]:
    pair = len(approaches) == 2
    header = ["Block", *(f"n {n}" for n in names), *(f"mean {n}" for n in names)]
    if pair:
        header.append("Delta")
    body = []
    for row in rows:
        cells = [row.label, *(str(row.n[a]) for a in approaches), *(_fmt(row.mean[a]) for a in approaches)]
        if pair:
            cells.append(_fmt(row.delta(*approaches)))
        body.append(cells)
    return _table(header, body)


def render_report(report: SuiteReport, labels: Mapping[str, str] | None = None) -> tuple[str, dict]:
    """Render ``report`` as text tables and return them with a machine-readable summary.

    The block tables carry a Delta column (first mean minus second) exactly
    when two approaches are compared.
    """
    labels = dict(labels or {})
    approaches = report.approaches
    names = [labels.get(a, a) for a in approaches]
    lines = [TITLE, "=" * len(TITLE)]
    summary: dict = {"instances": len(report.instances), "approaches": approaches,
                     "labels": {a: labels.get(a, a) for a in approaches}, "block_size": report.block_size,
                     "difficulty_key": report.difficulty_key}
    if report.empty:
        return "\n".join(lines) + "\n", summary

    lines.append(f"{len(report.instances)} instances, {len(approaches)} approaches")
    if report.difficulty_key:
        lines.append(f"difficulty proxy: plan length of {labels.get(report.difficulty_key, report.difficulty_key)}")
    for w in report.warnings:
        lines.append(f"warning: {w}")

    errors = any(s.harness_error for s in report.summaries.values())
    header = ["Approach", "Solved (rate)", "Timeout", "Early exit"] + (["Harness error"] if errors else [])
    rows = []
    for a, name in zip(approaches, names):
        s = report.summaries[a]
        row = [name, f"{s.solved} ({s.rate_text})", str(s.timeout), str(s.early_exit)]
        if errors:
            row.append(str(s.harness_error))
        rows.append(row)
    lines += ["", "Outcomes", *_table(header, rows)]

    lines += ["", f"Mean plan length per block of {report.block_size} (solved instances)",
              *_block_table(report.blocks, approaches, names)]
    lines += ["", f"Mean plan length per block, co-solved instances only (n = {len(report.co_solved)})"]
    if report.co_blocks:
        lines += _block_table(report.co_blocks, approaches, names)
    else:
        lines.append("(no instance solved by every approach)")

    token_rows = []
    for a, name in zip(approaches, names):
        t = report.tokens[a]
        token_rows.append([name, f"{t.total:,}", _fmt(t.per_run, 0), _fmt(t.per_solution, 0),
                           "yes" if t.estimated else "no"])
    lines += ["", "Token cost", *_table(["Approach", "Total", "Per run", "Per solution", "Estimated"], token_rows)]

    summary.update({
        "outcomes": {a: {"solved": s.solved, "rate": round(s.rate, 1), "timeout": s.timeout,
                         "early_exit": s.early_exit, "harness_error": s.harness_error, "total": s.total}
                     for a, s in report.summaries.items()},
        "blocks": [_block_dict(r, approaches) for r in report.blocks],
        "co_solved": report.co_solved,
        "co_blocks": [_block_dict(r, approaches) for r in report.co_blocks],
        "tokens": {a: {"total": t.total, "per_run": t.per_run, "per_solution": t.per_solution,
                       "estimated": t.estimated} for a, t in report.tokens.items()},
        "warnings": report.warnings,
    })
    return "\n".join(lines) + "\n", summary


def _block_dict(row: BlockRow, approaches: list[str]) -> dict:
    d = {"block": row.label, "n": dict(row.n), "mean": dict(row.mean)}
    if len(approaches) == 2:
        d["delta"] = row.delta(*approaches)
    return d


def render_hard_cases(analysis, labels: Mapping[str, str] | None = None) -> str:
    labels = dict(labels or {})
    lines = [f"Hard-case analysis over {len(analysis.hard_set)} instance(s)"]
    for a, ids in analysis.solved.items():
        lines.append(f"  {labels.get(a, a)} solved: {ids}")
    for (a, b), ids in analysis.only.items():
        lines.append(f"  {labels.get(a, a)} only (vs {labels.get(b, b)}): {ids}")
    lines.append(f"  common: {analysis.common}")
    return "\n".join(lines) + "\n"
