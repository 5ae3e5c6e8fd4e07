import json
import time

import httpx
import pytest

from pddlsim.llm import (AnthropicMessages, AuthError, BudgetExceeded, ChatTurn, HttpChatClient, OpenAIChat,
                         ScriptedClient, ScriptExhausted, ToolCall, TransportError, UsageStats, estimate_tokens,
                         estimate_usage, fingerprint)
from pddlsim.mcp_server import TOOLS

MSGS = [ChatTurn("system", "be brief"), ChatTurn("user", "hello")]


# -- scripted client ------------------------------------------------------------


def test_scripted_text_and_usage():
    c = ScriptedClient([("hi there", UsageStats(10, 3))])
    turn, usage = c.complete(MSGS)
    assert turn == ChatTurn("assistant", "hi there")
    assert usage == UsageStats(10, 3) and not usage.estimated
    assert c.requests == [MSGS]


def test_scripted_tool_call_is_structural():
    call = ToolCall("c1", "query_current_state", {"session_id": "s1"})
    c = ScriptedClient([ChatTurn("assistant", "", [call])])
    turn, _ = c.complete(MSGS)
    assert turn.tool_calls == [call] and turn.content == ""


def test_scripted_estimates_missing_usage():
    c = ScriptedClient(["x" * 10])
    _, usage = c.complete(MSGS)
    assert usage.estimated
    assert usage.output_tokens == 3  # ceil(10 / 4)
    assert usage.input_tokens == estimate_tokens("be briefhello")


def test_scripted_exhaustion_is_loud():
    c = ScriptedClient(["one"])
    c.complete(MSGS)
    with pytest.raises(ScriptExhausted):
        c.complete(MSGS)


def test_scripted_fingerprint_and_callable():
    c = ScriptedClient(["fallback"], by_fingerprint={fingerprint(MSGS): lambda msgs: f"seen {len(msgs)}"})
    assert c.complete(MSGS)[0].content == "seen 2"
    assert c.complete(MSGS[:1])[0].content == "fallback"


def test_scripted_respects_deadline():
    with pytest.raises(BudgetExceeded):
        ScriptedClient(["x"]).complete(MSGS, deadline=time.monotonic() - 1)


def test_usage_accumulates():
    c = ScriptedClient([("a", UsageStats(1, 2)), ("b", UsageStats(3, 4))])
    c.complete(MSGS)
    c.complete(MSGS)
    assert c.usage == UsageStats(4, 6) and c.usage.total == 10


def test_estimator():
    assert estimate_tokens("") == 0
    assert estimate_tokens("abcd") == 1
    assert estimate_tokens("abcde") == 2
    u = estimate_usage([ChatTurn("user", "a" * 8)], ChatTurn("assistant", "b" * 4))
    assert (u.input_tokens, u.output_tokens, u.estimated) == (2, 1, True)


# -- HTTP client ----------------------------------------------------------------

OPENAI_REPLY = {
    "choices": [{"message": {"role": "assistant", "content": None, "tool_calls": [
        {"id": "call_1", "type": "function",
         "function": {"name": "execute_single_action", "arguments": "{\"action\": \"(pick-up a)\"}"}}]}}],
    "usage": {"prompt_tokens": 120, "completion_tokens": 15},
}
ANTHROPIC_REPLY = {
    "content": [{"type": "text", "text": "Let me look."},
                {"type": "tool_use", "id": "tu_1", "name": "query_current_state", "input": {}}],
    "usage": {"input_tokens": 200, "output_tokens": 20},
}


def client(provider, handler, **kw):
    http = httpx.Client(transport=httpx.MockTransport(handler))
    base = "https://api.example" + ("/v1" if provider == "openai" else "")
    return HttpChatClient(provider, base, "test-model", http=http, backoff=0.01, **kw)


def test_openai_roundtrip(monkeypatch):
    monkeypatch.setenv("TEST_KEY", "sk-test")
    seen = {}

    def handler(request):
        seen["url"] = str(request.url)
        seen["auth"] = request.headers.get("authorization")
        seen["body"] = json.loads(request.content)
        return httpx.Response(200, json=OPENAI_REPLY)

    c = client("openai", handler, api_key_env="TEST_KEY")
    history = MSGS + [ChatTurn("assistant", "", [ToolCall("c0", "query_current_state", {})]),
                      ChatTurn("tool", "{\"state\": []}", tool_call_id="c0", name="query_current_state")]
    turn, usage = c.complete(history, tools=[t.to_mcp() for t in TOOLS], temperature=0.2)
    assert seen["url"] == "https://api.example/v1/chat/completions"
    assert seen["auth"] == "Bearer sk-test"
    body = seen["body"]
    assert body["model"] == "test-model" and body["temperature"] == 0.2
    assert [t["function"]["name"] for t in body["tools"]] == [t.name for t in TOOLS]
    assert body["messages"][2]["tool_calls"][0]["function"]["name"] == "query_current_state"
    assert body["messages"][3] == {"role": "tool", "content": "{\"state\": []}", "tool_call_id": "c0"}
    assert turn.tool_calls == [ToolCall("call_1", "execute_single_action", {"action": "(pick-up a)"})]
    assert usage == UsageStats(120, 15)


def test_anthropic_roundtrip(monkeypatch):
    monkeypatch.setenv("TEST_KEY", "ak-test")
    seen = {}

    def handler(request):
        seen["url"] = str(request.url)
        seen["key"] = request.headers.get("x-api-key")
        seen["version"] = request.headers.get("anthropic-version")
        seen["body"] = json.loads(request.content)
        return httpx.Response(200, json=ANTHROPIC_REPLY)

    c = client("anthropic", handler, api_key_env="TEST_KEY")
    history = MSGS + [ChatTurn("assistant", "", [ToolCall("t0", "query_current_state", {})]),
                      ChatTurn("tool", "ok", tool_call_id="t0")]
    turn, usage = c.complete(history, tools=list(TOOLS))
    assert seen["url"] == "https://api.example/v1/messages"
    assert seen["key"] == "ak-test" and seen["version"]
    body = seen["body"]
    assert body["system"] == "be brief"
    assert [m["role"] for m in body["messages"]] == ["user", "assistant", "user"]
    assert body["messages"][2]["content"][0] == {"type": "tool_result", "tool_use_id": "t0", "content": "ok"}
    assert body["tools"][0]["input_schema"] == TOOLS[0].input_schema
    assert turn.content == "Let me look."
    assert turn.tool_calls == [ToolCall("tu_1", "query_current_state", {})]
    assert usage == UsageStats(200, 20)


def test_missing_usage_is_estimated():
    reply = {"choices": [{"message": {"content": "abcdefgh"}}]}
    c = client("openai", lambda r: httpx.Response(200, json=reply))
    _, usage = c.complete(MSGS)
    assert usage.estimated and usage.output_tokens == 2


def test_retries_count_only_completed_response():
    calls = []

    def handler(request):
        calls.append(1)
        if len(calls) < 3:
            return httpx.Response(429 if len(calls) == 1 else 503, json={})
        return httpx.Response(200, json=OPENAI_REPLY)

    c = client("openai", handler)
    _, usage = c.complete(MSGS)
    assert len(calls) == 3
    assert usage == UsageStats(120, 15) and c.usage == usage


def test_transport_errors_are_retried():
    calls = []

    def handler(request):
        calls.append(1)
        if len(calls) == 1:
            raise httpx.ConnectError("refused")
        return httpx.Response(200, json=OPENAI_REPLY)

    assert client("openai", handler).complete(MSGS)[1] == UsageStats(120, 15)


def test_gives_up_after_max_retries():
    c = client("openai", lambda r: httpx.Response(500, json={}), max_retries=2)
    with pytest.raises(TransportError, match="giving up after 3"):
        c.complete(MSGS)
    assert c.usage == UsageStats()


@pytest.mark.parametrize("status", [401, 403])
def test_auth_error(status):
    with pytest.raises(AuthError):
        client("openai", lambda r: httpx.Response(status, json={})).complete(MSGS)


def test_missing_key_env(monkeypatch):
    monkeypatch.delenv("NOT_SET_KEY", raising=False)
    with pytest.raises(AuthError):
        client("openai", lambda r: httpx.Response(200, json=OPENAI_REPLY), api_key_env="NOT_SET_KEY").complete(MSGS)


def test_non_retryable_status():
    with pytest.raises(TransportError) as exc:
        client("openai", lambda r: httpx.Response(400, text="bad request")).complete(MSGS)
    assert not isinstance(exc.value, (AuthError, BudgetExceeded))


def test_backoff_bounded_by_deadline():
    c = client("openai", lambda r: httpx.Response(429, json={}))
    c.backoff = 10.0
    start = time.monotonic()
    with pytest.raises(BudgetExceeded):
        c.complete(MSGS, deadline=time.monotonic() + 0.5)
    assert time.monotonic() - start < 0.5


def test_expired_deadline_sends_nothing():
    calls = []
    c = client("openai", lambda r: calls.append(1) or httpx.Response(200, json=OPENAI_REPLY))
    with pytest.raises(BudgetExceeded):
        c.complete(MSGS, deadline=time.monotonic() - 1)
    assert calls == []


def test_malformed_response():
    with pytest.raises(TransportError):
        client("openai", lambda r: httpx.Response(200, json={"nope": 1})).complete(MSGS)
    with pytest.raises(TransportError):
        client("anthropic", lambda r: httpx.Response(200, json={"nope": 1})).complete(MSGS)


def test_unparsable_tool_arguments_kept_raw():
    turn, _ = OpenAIChat().parse({"choices": [{"message": {"content": "", "tool_calls": [
        {"id": "x", "function": {"name": "f", "arguments": "{broken"}}]}}]})
    assert turn.tool_calls[0].arguments == "{broken"


def test_empty_messages_rejected():
    with pytest.raises(ValueError):
        client("openai", lambda r: httpx.Response(200, json=OPENAI_REPLY)).complete([])


def test_anthropic_groups_parallel_tool_results():
    body = AnthropicMessages().build("m", [
        ChatTurn("user", "go"),
        ChatTurn("assistant", "", [ToolCall("a", "f", {}), ToolCall("b", "g", {})]),
        ChatTurn("tool", "1", tool_call_id="a"), ChatTurn("tool", "2", tool_call_id="b")], None, None)
    assert len(body["messages"]) == 3
    assert [b["tool_use_id"] for b in body["messages"][2]["content"]] == ["a", "b"]
