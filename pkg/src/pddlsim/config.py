"""Run configuration: an INI file whose values may reference environment variables.

Example::

    [llm]
    provider = openai            ; or anthropic
    base_url = ${LLM_BASE_URL}
    model = gpt-4o
    api_key_env = OPENAI_API_KEY ; the key itself never lives in the file

    [planners]
    lama-first = fast-downward.py --alias lama-first --plan-file {plan_out} {domain} {problem}

    [bench]
    budget = 180
    parallelism = 1
    log = runs.jsonl
    report = report.txt
    summary = report.json

``${NAME}`` is replaced from the environment when the file is loaded;
write ``$$`` for a literal dollar sign.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field
from pathlib import Path
from string import Template
from typing import Mapping


class ConfigError(ValueError):
    pass


@dataclass
class LlmConfig:
    provider: str = "openai"
    base_url: str = "https://api.openai.com/v1"
    model: str = ""
    api_key_env: str | None = None
    request_timeout: float = 120.0
    max_retries: int = 6


@dataclass
class Config:
    llm: LlmConfig = field(default_factory=LlmConfig)
    planners: dict[str, str] = field(default_factory=dict)
    budget: float = 180.0
    parallelism: int = 1
    log: Path | None = None
    report: Path | None = None
    summary: Path | None = None
    block_size: int = 10
    difficulty_key: str | None = None

    def __post_init__(self):
        if self.budget <= 0:
            raise ConfigError("budget must be positive")
        if self.parallelism < 1:
            raise ConfigError("parallelism must be at least 1")

    def check_llm(self, env: Mapping[str, str] | None = None) -> None:
        """Fail early if an LLM adapter is selected but cannot authenticate."""
        env = os.environ if env is None else env
        if not self.llm.model:
            raise ConfigError("[llm] model is not set")
        if self.llm.api_key_env and not env.get(self.llm.api_key_env):
            raise ConfigError(f"environment variable {self.llm.api_key_env} (named by [llm] api_key_env) is not set")


def _interpolate(value: str, env: Mapping[str, str], where: str) -> str:
    try:
        return Template(value).substitute(env)
    except KeyError as exc:
        raise ConfigError(f"{where}: environment variable {exc.args[0]} is not set") from None
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def load_config(path: str | Path | None = None, env: Mapping[str, str] | None = None) -> Config:
    if path is None:
        return Config()
    env = os.environ if env is None else env
    parser = configparser.RawConfigParser(inline_comment_prefixes=(";",))
    parser.optionxform = str  # planner names are case-sensitive
    try:
        with open(path, encoding="utf-8") as f:
            parser.read_file(f)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    values = {s: {k: _interpolate(v, env, f"{path} [{s}] {k}") for k, v in parser.items(s)}
              for s in parser.sections()}
    unknown = set(values) - {"llm", "planners", "bench"}
    if unknown:
        raise ConfigError(f"{path}: unknown section(s) {sorted(unknown)}")
    base = Path(path).resolve().parent

    def num(section, key, kind, default):
        raw = values.get(section, {}).get(key)
        if raw is None:
            return default
        try:
            return kind(raw)
        except ValueError:
            raise ConfigError(f"{path} [{section}] {key}: expected {kind.__name__}, got {raw!r}") from None

    def out_path(key):
        raw = values.get("bench", {}).get(key)
        return (base / raw) if raw else None

    llm = values.get("llm", {})
    return Config(
        llm=LlmConfig(provider=llm.get("provider", "openai"),
                      base_url=llm.get("base_url", LlmConfig.base_url),
                      model=llm.get("model", ""),
                      api_key_env=llm.get("api_key_env") or None,
                      request_timeout=num("llm", "request_timeout", float, 120.0),
                      max_retries=num("llm", "max_retries", int, 6)),
        planners=dict(values.get("planners", {})),
        budget=num("bench", "budget", float, 180.0),
        parallelism=num("bench", "parallelism", int, 1),
        log=out_path("log"),
        report=out_path("report"),
        summary=out_path("summary"),
        block_size=num("bench", "block_size", int, 10),
        difficulty_key=values.get("bench", {}).get("difficulty_key") or None,
    )
