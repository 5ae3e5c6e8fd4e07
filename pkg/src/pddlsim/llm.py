"""Provider-agnostic chat-with-tools client.

``complete(messages, tools, temperature, deadline)`` returns the assistant
turn and its token usage. Provider wire formats live in small translation
classes (:class:`OpenAIChat`, :class:`AnthropicMessages`);
:class:`ScriptedClient` replays canned turns for offline runs.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Iterable, Iterator, Protocol, Sequence

import httpx

log = logging.getLogger(__name__)


class TransportError(Exception):
    """The provider could not be reached or returned an unusable response."""


class BudgetExceeded(TransportError):
    pass


class AuthError(TransportError):
    pass


class ScriptExhausted(AssertionError):
    """A scripted client was asked for more turns than it was given."""


@dataclass
class ToolCall:
    id: str
    name: str
    arguments: Any  # parsed JSON object, or the raw string when it did not parse


@dataclass
class ChatTurn:
    role: str  # system | user | assistant | tool
    content: str = ""
    tool_calls: list[ToolCall] = field(default_factory=list)
    tool_call_id: str | None = None
    name: str | None = None


@dataclass
class UsageStats:
    input_tokens: int = 0
    output_tokens: int = 0
    estimated: bool = False

    def __add__(self, other: UsageStats) -> UsageStats:
        return UsageStats(self.input_tokens + other.input_tokens, self.output_tokens + other.output_tokens,
                          self.estimated or other.estimated)

    @property
    def total(self) -> int:
        return self.input_tokens + self.output_tokens


def estimate_tokens(text: str) -> int:
    """Fallback estimator when a provider reports no usage: characters / 4."""
    return math.ceil(len(text) / 4)


def _turn_text(turn: ChatTurn) -> str:
    parts = [turn.content or ""]
    for tc in turn.tool_calls:
        args = tc.arguments if isinstance(tc.arguments, str) else json.dumps(tc.arguments, sort_keys=True)
        parts.append(f"{tc.name}{args}")
    return "".join(parts)


def estimate_usage(messages: Sequence[ChatTurn], reply: ChatTurn) -> UsageStats:
    prompt = "".join(_turn_text(m) for m in messages)
    return UsageStats(estimate_tokens(prompt), estimate_tokens(_turn_text(reply)), estimated=True)


class ChatClient(Protocol):
    def complete(self, messages: Sequence[ChatTurn], tools: Sequence[Any] | None = None,
                 temperature: float | None = None, deadline: float | None = None) -> tuple[ChatTurn, UsageStats]:
        ...


def fingerprint(messages: Sequence[ChatTurn]) -> str:
    payload = json.dumps([asdict(m) for m in messages], sort_keys=True, default=str)
    return hashlib.sha256(payload.encode()).hexdigest()


# ---------------------------------------------------------------------------
# Scripted client
# ---------------------------------------------------------------------------

ScriptEntry = Any  # ChatTurn | str | (ChatTurn|str, UsageStats) | Callable[[list[ChatTurn]], ScriptEntry]


class ScriptedClient:
    """Deterministic client replaying canned responses.

    Entries may be a :class:`ChatTurn`, a plain string (assistant text), a
    ``(turn, UsageStats)`` pair, or a callable taking the message list and
    returning one of those. ``by_fingerprint`` maps :func:`fingerprint`
    values to entries and takes precedence over the ordered script. The
    ordered script may be an infinite iterator.
    """

    def __init__(self, script: Iterable[ScriptEntry] = (), by_fingerprint: dict[str, ScriptEntry] | None = None,
                 latency: float = 0.0):
        self._script: Iterator[ScriptEntry] = iter(script)
        self._keyed = dict(by_fingerprint or {})
        self.latency = latency
        self.requests: list[list[ChatTurn]] = []
        self.usage = UsageStats()

    def complete(self, messages, tools=None, temperature=None, deadline=None):
        if deadline is not None and time.monotonic() >= deadline:
            raise BudgetExceeded("budget exhausted before request")
        msgs = list(messages)
        self.requests.append(msgs)
        entry = self._keyed.get(fingerprint(msgs)) if self._keyed else None
        if entry is None:
            try:
                entry = next(self._script)
            except StopIteration:
                raise ScriptExhausted(f"script exhausted after {len(self.requests) - 1} response(s)") from None
        while callable(entry):
            entry = entry(msgs)
        usage = None
        if isinstance(entry, tuple):
            entry, usage = entry
        turn = entry if isinstance(entry, ChatTurn) else ChatTurn("assistant", str(entry))
        if self.latency:
            time.sleep(self.latency)
        if usage is None:
            usage = estimate_usage(msgs, turn)
        self.usage = self.usage + usage
        return turn, usage


# ---------------------------------------------------------------------------
# Provider translation layers
# ---------------------------------------------------------------------------


def _tool_fields(tool) -> tuple[str, str, dict]:
    if isinstance(tool, dict):
        return tool["name"], tool.get("description", ""), tool.get("inputSchema") or tool.get("input_schema")
    return tool.name, tool.description, tool.input_schema


def _parse_args(raw) -> Any:
    if isinstance(raw, (dict, list)):
        return raw
    try:
        return json.loads(raw) if raw else {}
    except (TypeError, json.JSONDecodeError):
        return raw


class OpenAIChat:
    """``/chat/completions`` wire format (OpenAI and compatible servers)."""

    path = "/chat/completions"

    def headers(self, api_key: str | None) -> dict[str, str]:
        return {"Authorization": f"Bearer {api_key}"} if api_key else {}

    def build(self, model: str, messages: Sequence[ChatTurn], tools, temperature) -> dict:
        out = []
        for m in messages:
            msg: dict[str, Any] = {"role": m.role, "content": m.content}
            if m.tool_calls:
                msg["tool_calls"] = [
                    {"id": tc.id, "type": "function",
                     "function": {"name": tc.name, "arguments": tc.arguments if isinstance(tc.arguments, str)
                                  else json.dumps(tc.arguments)}}
                    for tc in m.tool_calls]
            if m.role == "tool":
                msg["tool_call_id"] = m.tool_call_id
            out.append(msg)
        body: dict[str, Any] = {"model": model, "messages": out}
        if tools:
            body["tools"] = [{"type": "function", "function": {"name": n, "description": d, "parameters": s}}
                             for n, d, s in map(_tool_fields, tools)]
        if temperature is not None:
            body["temperature"] = temperature
        return body

    def parse(self, data: dict) -> tuple[ChatTurn, UsageStats | None]:
        try:
            msg = data["choices"][0]["message"]
        except (KeyError, IndexError, TypeError):
            raise TransportError(f"unexpected response shape: {str(data)[:200]}") from None
        calls = [ToolCall(tc.get("id", f"call_{i}"), tc["function"]["name"], _parse_args(tc["function"].get("arguments")))
                 for i, tc in enumerate(msg.get("tool_calls") or [])]
        turn = ChatTurn("assistant", msg.get("content") or "", calls)
        usage = data.get("usage")
        if not usage or "prompt_tokens" not in usage:
            return turn, None
        return turn, UsageStats(int(usage["prompt_tokens"]), int(usage.get("completion_tokens", 0)))


class AnthropicMessages:
    """``/v1/messages`` wire format."""

    path = "/v1/messages"
    version = "2023-06-01"

    def __init__(self, max_tokens: int = 4096):
        self.max_tokens = max_tokens

    def headers(self, api_key: str | None) -> dict[str, str]:
        h = {"anthropic-version": self.version}
        if api_key:
            h["x-api-key"] = api_key
        return h

    def build(self, model: str, messages: Sequence[ChatTurn], tools, temperature) -> dict:
        system = "\n\n".join(m.content for m in messages if m.role == "system")
        out: list[dict] = []
        for m in messages:
            if m.role == "system":
                continue
            if m.role == "tool":
                block = {"type": "tool_result", "tool_use_id": m.tool_call_id, "content": m.content}
                if out and out[-1]["role"] == "user" and isinstance(out[-1]["content"], list) \
                        and out[-1]["content"] and out[-1]["content"][0].get("type") == "tool_result":
                    out[-1]["content"].append(block)
                else:
                    out.append({"role": "user", "content": [block]})
                continue
            if m.role == "assistant" and m.tool_calls:
                blocks: list[dict] = [{"type": "text", "text": m.content}] if m.content else []
                blocks += [{"type": "tool_use", "id": tc.id, "name": tc.name,
                            "input": tc.arguments if isinstance(tc.arguments, dict) else {}}
                           for tc in m.tool_calls]
                out.append({"role": "assistant", "content": blocks})
                continue
            out.append({"role": m.role, "content": m.content})
        body: dict[str, Any] = {"model": model, "max_tokens": self.max_tokens, "messages": out}
        if system:
            body["system"] = system
        if tools:
            body["tools"] = [{"name": n, "description": d, "input_schema": s} for n, d, s in map(_tool_fields, tools)]
        if temperature is not None:
            body["temperature"] = temperature
        return body

    def parse(self, data: dict) -> tuple[ChatTurn, UsageStats | None]:
        if not isinstance(data, dict) or "content" not in data:
            raise TransportError(f"unexpected response shape: {str(data)[:200]}")
        text = "".join(b.get("text", "") for b in data["content"] if b.get("type") == "text")
        calls = [ToolCall(b["id"], b["name"], b.get("input") or {})
                 for b in data["content"] if b.get("type") == "tool_use"]
        usage = data.get("usage")
        turn = ChatTurn("assistant", text, calls)
        if not usage or "input_tokens" not in usage:
            return turn, None
        return turn, UsageStats(int(usage["input_tokens"]), int(usage.get("output_tokens", 0)))


PROVIDERS: dict[str, Callable[[], Any]] = {"openai": OpenAIChat, "anthropic": AnthropicMessages}


class HttpChatClient:
    """HTTPS chat client with exponential backoff bounded by the caller's deadline.

    Only completed responses contribute to :attr:`usage`; failed attempts
    consume nothing.
    """

    RETRY_STATUS = {408, 409, 425, 429, 500, 502, 503, 504, 529}

    def __init__(self, provider: str | Any, base_url: str, model: str, api_key_env: str | None = None,
                 request_timeout: float = 120.0, max_retries: int = 6, backoff: float = 1.0,
                 http: httpx.Client | None = None):
        self.wire = PROVIDERS[provider]() if isinstance(provider, str) else provider
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.api_key_env = api_key_env
        self.request_timeout = request_timeout
        self.max_retries = max_retries
        self.backoff = backoff
        self.http = http or httpx.Client()
        self.usage = UsageStats()

    def _api_key(self) -> str | None:
        if not self.api_key_env:
            return None
        key = os.environ.get(self.api_key_env)
        if not key:
            raise AuthError(f"environment variable {self.api_key_env} is not set")
        return key

    def complete(self, messages, tools=None, temperature=None, deadline=None):
        if not messages:
            raise ValueError("messages must be non-empty")
        body = self.wire.build(self.model, messages, tools, temperature)
        headers = self.wire.headers(self._api_key())
        url = self.base_url + self.wire.path
        attempt = 0
        while True:
            timeout = self.request_timeout
            if deadline is not None:
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    raise BudgetExceeded("budget exhausted while waiting for the provider")
                timeout = min(timeout, remaining)
            try:
                resp = self.http.post(url, json=body, headers=headers, timeout=timeout)
            except httpx.TransportError as exc:
                err: Exception = exc
            else:
                if resp.status_code in (401, 403):
                    raise AuthError(f"provider rejected credentials ({resp.status_code})")
                if resp.status_code < 400:
                    turn, usage = self.wire.parse(resp.json())
                    if usage is None:
                        usage = estimate_usage(messages, turn)
                    self.usage = self.usage + usage
                    return turn, usage
                if resp.status_code not in self.RETRY_STATUS:
                    raise TransportError(f"provider error {resp.status_code}: {resp.text[:200]}")
                err = TransportError(f"provider error {resp.status_code}")
            attempt += 1
            if attempt > self.max_retries:
                raise TransportError(f"giving up after {attempt} attempts: {err}")
            delay = self.backoff * 2 ** (attempt - 1)
            if deadline is not None and time.monotonic() + delay >= deadline:
                raise BudgetExceeded(f"budget exhausted during retry backoff ({err})")
            log.warning("transient provider failure (%s); retrying in %.1fs", err, delay)
            time.sleep(delay)
