"""Run records, the append-only JSONL log and suite manifests."""

from __future__ import annotations

import json
import logging
import os
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from typing import Iterable

log = logging.getLogger(__name__)

STATUSES = ("solved", "timeout", "early_exit", "harness_error")


@dataclass
class RunRecord:
    instance: int
    approach: str
    status: str
    plan_length: int | None = None
    wall_time_s: float = 0.0
    tokens_in: int = 0
    tokens_out: int = 0
    attempts: int = 0
    instance_name: str = ""
    failed_action_attempts: int = 0
    tokens_estimated: bool = False
    timestamp: str = ""
    plan: list[str] | None = None
    detail: str = ""
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")
        if (self.plan_length is not None) != (self.status == "solved"):
            raise ValueError("plan_length is recorded exactly for solved runs")

    @property
    def key(self) -> tuple[int, str]:
        return self.instance, self.approach

    @property
    def tokens(self) -> int:
        return self.tokens_in + self.tokens_out

    def to_json(self) -> str:
        d = asdict(self)
        extra = d.pop("extra")
        d.update(extra)
        return json.dumps(d, separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: dict) -> RunRecord:
        known = {f for f in cls.__dataclass_fields__ if f != "extra"}
        return cls(**{k: v for k, v in d.items() if k in known},
                   extra={k: v for k, v in d.items() if k not in known})


def now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class RunLog:
    """Append-only JSONL file; one record per line, flushed and fsynced per append."""

    def __init__(self, path: str | Path):
        self.path = Path(path)

    def load(self) -> list[RunRecord]:
        if not self.path.exists():
            return []
        records = []
        lines = self.path.read_text(encoding="utf-8").splitlines()
        for n, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            try:
                records.append(RunRecord.from_dict(json.loads(line)))
            except (json.JSONDecodeError, TypeError, ValueError) as exc:
                if n == len(lines):
                    log.warning("ignoring truncated last line of %s", self.path)
                    continue
                raise ValueError(f"{self.path}:{n}: bad record: {exc}") from None
        return records

    def append(self, record: RunRecord) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._drop_partial_tail()
        with self.path.open("a", encoding="utf-8") as f:
            f.write(record.to_json() + "\n")
            f.flush()
            os.fsync(f.fileno())

    def _drop_partial_tail(self) -> None:
        """Cut a final line left without its newline by a crash; that record never completed."""
        if not self.path.exists():
            return
        with self.path.open("r+b") as f:
            size = f.seek(0, os.SEEK_END)
            if size == 0:
                return
            f.seek(size - 1)
            if f.read(1) == b"\n":
                return
            f.seek(0)
            keep = f.read().rfind(b"\n") + 1
            log.warning("dropping %d byte(s) of incomplete record at the end of %s", size - keep, self.path)
            f.truncate(keep)


def write_records(path: str | Path, records: Iterable[RunRecord]) -> None:
    runlog = RunLog(path)
    for r in records:
        runlog.append(r)


@dataclass(frozen=True)
class Instance:
    index: int
    name: str
    domain_path: Path
    problem_path: Path

    @property
    def domain_text(self) -> str:
        return self.domain_path.read_text(encoding="utf-8")

    @property
    def problem_text(self) -> str:
        return self.problem_path.read_text(encoding="utf-8")


def load_manifest(path: str | Path) -> list[Instance]:
    """Read a suite manifest.

    Each non-blank, non-``#`` line is ``<domain> <problem>``, or just
    ``<problem>`` after a ``domain <path>`` line has set the default.
    Relative paths resolve against the manifest's directory.
    """
    path = Path(path)
    base = path.parent
    default_domain: Path | None = None
    instances: list[Instance] = []
    for n, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "domain" and len(parts) == 2:
            default_domain = (base / parts[1]).resolve()
            continue
        if len(parts) == 2:
            dom, prob = (base / parts[0]).resolve(), (base / parts[1]).resolve()
        elif len(parts) == 1 and default_domain is not None:
            dom, prob = default_domain, (base / parts[0]).resolve()
        else:
            raise ValueError(f"{path}:{n}: expected '<domain> <problem>' or a problem after 'domain <path>'")
        instances.append(Instance(len(instances), prob.stem, dom, prob))
    if not instances:
        raise ValueError(f"{path}: manifest lists no instances")
    return instances


def load_published_fixture() -> dict:
    """The bundled transcription of published outcomes (see its ``description``)."""
    text = resources.files("pddlsim.data").joinpath("published_outcomes.json").read_text(encoding="utf-8")
    data = json.loads(text)
    data["records"] = [RunRecord.from_dict(r) for r in data["records"]]
    return data
