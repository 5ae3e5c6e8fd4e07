"""MCP tool server: the seven engine operations over newline-delimited JSON-RPC 2.0.

Domain-level failures (unknown session, parse errors, unknown actions) are
returned as ordinary tool results with ``isError`` set, so a model sees
them as observations. JSON-RPC errors are reserved for protocol faults.
"""

from __future__ import annotations

import json
import logging
import sys
from dataclasses import dataclass
from typing import Any, Callable, TextIO

import jsonschema

from .engine import Engine, coerce_signature
from .errors import PddlError
from .pddl import format_atom, format_signature

log = logging.getLogger(__name__)

PROTOCOL_VERSION = "2025-06-18"
SERVER_INFO = {"name": "pddlsim", "version": "0.1.0"}

PARSE_ERROR = -32700
INVALID_REQUEST = -32600
METHOD_NOT_FOUND = -32601
INVALID_PARAMS = -32602
INTERNAL_ERROR = -32603


@dataclass(frozen=True)
class ToolDescriptor:
    name: str
    description: str
    input_schema: dict
    output_schema: dict

    def to_mcp(self) -> dict:
        return {
            "name": self.name,
            "description": self.description,
            "inputSchema": self.input_schema,
            "outputSchema": self.output_schema,
        }


_SESSION = {"type": "string", "description": "Session identifier; optional when exactly one session exists."}
_ATOMS = {"type": "array", "items": {"type": "string"}, "description": "Ground atoms such as \"(on a b)\", sorted."}
_ACTION = {"type": "string", "description": "Ground action in plan syntax, e.g. \"(pick-up a)\"."}


def _obj(props: dict, required: list[str] = ()) -> dict:
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


TOOLS: tuple[ToolDescriptor, ...] = (
    ToolDescriptor(
        "initialise_session",
        "Load a PDDL domain and problem (as text or file paths), ground all actions and start a "
        "session in the initial state. Returns the session id and size statistics.",
        _obj({"domain": {"type": "string", "description": "PDDL domain text or path."},
              "problem": {"type": "string", "description": "PDDL problem text or path."},
              "session_id": _SESSION}, ["domain", "problem"]),
        _obj({"session_id": {"type": "string"},
              "num_objects": {"type": "integer", "minimum": 0},
              "num_init_atoms": {"type": "integer", "minimum": 0},
              "num_goal_literals": {"type": "integer", "minimum": 0},
              "num_ground_actions": {"type": "integer", "minimum": 0},
              "goal_reached": {"type": "boolean"}},
             ["session_id", "num_objects", "num_init_atoms", "num_goal_literals", "num_ground_actions",
              "goal_reached"]),
    ),
    ToolDescriptor(
        "query_current_state",
        "Return every ground atom that is currently true (all others are false) and whether the "
        "goal is satisfied.",
        _obj({"session_id": _SESSION}),
        _obj({"session_id": {"type": "string"}, "state": _ATOMS, "goal_reached": {"type": "boolean"}},
             ["session_id", "state", "goal_reached"]),
    ),
    ToolDescriptor(
        "query_applicable_actions",
        "Return all ground actions whose preconditions hold in the current state.",
        _obj({"session_id": _SESSION}),
        _obj({"session_id": {"type": "string"},
              "actions": {"type": "array", "items": {"type": "string"}}},
             ["session_id", "actions"]),
    ),
    ToolDescriptor(
        "execute_single_action",
        "Apply one ground action. On success the state advances and the step is recorded; if the "
        "action is not applicable the state is unchanged, applied is false and the unsatisfied "
        "preconditions are listed.",
        _obj({"action": _ACTION, "session_id": _SESSION}, ["action"]),
        _obj({"session_id": {"type": "string"},
              "action": {"type": "string"},
              "applied": {"type": "boolean"},
              "state": _ATOMS,
              "goal_reached": {"type": "boolean"},
              "message": {"type": "string"},
              "unsatisfied": {"type": "array", "items": {"type": "string"}},
              "step": {"type": ["integer", "null"]}},
             ["session_id", "action", "applied", "state", "goal_reached", "message", "unsatisfied", "step"]),
    ),
    ToolDescriptor(
        "reset_to_initial_state",
        "Restore the problem's initial state and clear the action history.",
        _obj({"session_id": _SESSION}),
        _obj({"session_id": {"type": "string"}, "state": _ATOMS, "goal_reached": {"type": "boolean"}},
             ["session_id", "state", "goal_reached"]),
    ),
    ToolDescriptor(
        "query_action_history",
        "Return the actions successfully executed since the session started or was last reset.",
        _obj({"session_id": _SESSION}),
        _obj({"session_id": {"type": "string"},
              "history": {"type": "array", "items": _obj(
                  {"step": {"type": "integer", "minimum": 1}, "action": {"type": "string"}},
                  ["step", "action"])}},
             ["session_id", "history"]),
    ),
    ToolDescriptor(
        "validate_complete_plan",
        "Check a complete action sequence from the initial state without touching the session "
        "state: reports whether every step applies and all goal conditions hold at the end.",
        _obj({"plan": {"type": "array", "items": {"type": "string"},
                       "description": "Ground actions in order, e.g. [\"(pick-up a)\", \"(stack a b)\"]."},
              "session_id": _SESSION}, ["plan"]),
        _obj({"session_id": {"type": "string"},
              "valid": {"type": "boolean"},
              "plan_length": {"type": "integer", "minimum": 0},
              "steps_applied": {"type": "integer", "minimum": 0},
              "goal_satisfied": {"type": "boolean"},
              "failing_step": {"oneOf": [
                  {"type": "null"},
                  _obj({"step": {"type": "integer", "minimum": 1}, "action": {"type": "string"},
                        "unsatisfied": {"type": "array", "items": {"type": "string"}}},
                       ["step", "action", "unsatisfied"])]},
              "final_state": _ATOMS,
              "message": {"type": "string"}},
             ["session_id", "valid", "plan_length", "steps_applied", "goal_satisfied", "failing_step",
              "final_state", "message"]),
    ),
)

TOOL_NAMES = tuple(t.name for t in TOOLS)


def describe_tools() -> list[ToolDescriptor]:
    return list(TOOLS)


class RpcError(Exception):
    def __init__(self, code: int, message: str, data: Any = None):
        super().__init__(message)
        self.code = code
        self.message = message
        self.data = data


def _atoms(atoms) -> list[str]:
    return [format_atom(a) for a in atoms]


class ToolHandlers:
    """Adapts :class:`Engine` operations to JSON-shaped tool results."""

    def __init__(self, engine: Engine):
        self.engine = engine

    def initialise_session(self, domain: str, problem: str, session_id: str | None = None) -> dict:
        s = self.engine.initialise_session(domain, problem, session_id)
        return {"session_id": s.session_id, "num_objects": s.num_objects, "num_init_atoms": s.num_init_atoms,
                "num_goal_literals": s.num_goal_literals, "num_ground_actions": s.num_ground_actions,
                "goal_reached": s.goal_reached}

    def query_current_state(self, session_id: str | None = None) -> dict:
        sid = self.engine.session(session_id).id
        state, reached = self.engine.query_current_state(sid)
        return {"session_id": sid, "state": _atoms(state), "goal_reached": reached}

    def query_applicable_actions(self, session_id: str | None = None) -> dict:
        sid = self.engine.session(session_id).id
        return {"session_id": sid,
                "actions": [format_signature(s) for s in self.engine.query_applicable_actions(sid)]}

    def execute_single_action(self, action: str, session_id: str | None = None) -> dict:
        sid = self.engine.session(session_id).id
        r = self.engine.execute_single_action(sid, action)
        return {"session_id": sid, "action": format_signature(coerce_signature(action)), "applied": r.applied,
                "state": _atoms(r.state), "goal_reached": r.goal_reached, "message": r.message,
                "unsatisfied": [str(l) for l in r.unsatisfied], "step": r.step}

    def reset_to_initial_state(self, session_id: str | None = None) -> dict:
        sid = self.engine.session(session_id).id
        state, reached = self.engine.reset_to_initial_state(sid)
        return {"session_id": sid, "state": _atoms(state), "goal_reached": reached}

    def query_action_history(self, session_id: str | None = None) -> dict:
        sid = self.engine.session(session_id).id
        return {"session_id": sid, "history": [{"step": i, "action": format_signature(s)}
                                               for i, s in self.engine.query_action_history(sid)]}

    def validate_complete_plan(self, plan: list[str], session_id: str | None = None) -> dict:
        sid = self.engine.session(session_id).id
        rep = self.engine.validate_complete_plan(sid, plan)
        failing = None
        if rep.failing_step is not None:
            f = rep.failing_step
            failing = {"step": f.index, "action": format_signature(f.signature),
                       "unsatisfied": [str(l) for l in f.unsatisfied]}
        return {"session_id": sid, "valid": rep.valid, "plan_length": rep.plan_length,
                "steps_applied": rep.steps_applied, "goal_satisfied": rep.goal_satisfied,
                "failing_step": failing, "final_state": _atoms(sorted(rep.final_state)),
                "message": rep.message}


class McpServer:
    """Transport-independent JSON-RPC dispatcher. One instance = one connection."""

    def __init__(self, engine: Engine | None = None):
        self.engine = engine or Engine()
        self.handlers = ToolHandlers(self.engine)
        self._tools = {t.name: t for t in TOOLS}
        self._methods: dict[str, Callable[[dict], Any]] = {
            "initialize": self._initialize,
            "ping": lambda params: {},
            "tools/list": lambda params: {"tools": [t.to_mcp() for t in TOOLS]},
            "tools/call": self._call_tool,
        }

    # -- JSON-RPC plumbing ------------------------------------------------

    def handle_line(self, line: str) -> str | None:
        """Process one incoming line; returns the response line or ``None`` for notifications."""
        try:
            msg = json.loads(line)
        except json.JSONDecodeError as exc:
            return self._encode(self._error(None, PARSE_ERROR, f"parse error: {exc.msg}"))
        response = self.handle_message(msg)
        return None if response is None else self._encode(response)

    def handle_message(self, msg: Any) -> dict | None:
        if not isinstance(msg, dict) or msg.get("jsonrpc") != "2.0" or not isinstance(msg.get("method"), str):
            req_id = msg.get("id") if isinstance(msg, dict) else None
            return self._error(req_id, INVALID_REQUEST, "invalid JSON-RPC 2.0 request")
        is_notification = "id" not in msg
        req_id = msg.get("id")
        method = msg["method"]
        params = msg.get("params") or {}
        handler = self._methods.get(method)
        if handler is None:
            if is_notification:
                return None
            return self._error(req_id, METHOD_NOT_FOUND, f"method not found: {method}")
        try:
            if not isinstance(params, dict):
                raise RpcError(INVALID_PARAMS, "params must be an object")
            result = handler(params)
        except RpcError as exc:
            return None if is_notification else self._error(req_id, exc.code, exc.message, exc.data)
        except Exception as exc:  # keep serving after a handler bug
            log.exception("internal error handling %s", method)
            return None if is_notification else self._error(req_id, INTERNAL_ERROR, f"internal error: {exc}")
        if is_notification:
            return None
        return {"jsonrpc": "2.0", "id": req_id, "result": result}

    @staticmethod
    def _error(req_id, code: int, message: str, data: Any = None) -> dict:
        err: dict[str, Any] = {"code": code, "message": message}
        if data is not None:
            err["data"] = data
        return {"jsonrpc": "2.0", "id": req_id, "error": err}

    @staticmethod
    def _encode(obj: dict) -> str:
        return json.dumps(obj, separators=(",", ":"), ensure_ascii=False)

    # -- MCP methods ------------------------------------------------------

    def _initialize(self, params: dict) -> dict:
        return {"protocolVersion": PROTOCOL_VERSION,
                "capabilities": {"tools": {"listChanged": False}},
                "serverInfo": SERVER_INFO}

    def _call_tool(self, params: dict) -> dict:
        name = params.get("name")
        args = params.get("arguments") or {}
        tool = self._tools.get(name) if isinstance(name, str) else None
        if tool is None:
            raise RpcError(INVALID_PARAMS, f"unknown tool: {name!r}", {"tools": list(TOOL_NAMES)})
        try:
            jsonschema.validate(args, tool.input_schema)
        except jsonschema.ValidationError as exc:
            raise RpcError(INVALID_PARAMS, f"invalid arguments for {name}: {exc.message}") from None
        try:
            payload = getattr(self.handlers, name)(**args)
        except (PddlError, OSError) as exc:
            text = f"{type(exc).__name__}: {exc}"
            return {"content": [{"type": "text", "text": text}], "isError": True}
        return {"content": [{"type": "text", "text": json.dumps(payload, separators=(",", ":"))}],
                "structuredContent": payload, "isError": False}


def serve(stdin: TextIO = None, stdout: TextIO = None, engine: Engine | None = None) -> None:
    """Serve newline-delimited JSON-RPC until ``stdin`` closes."""
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    server = McpServer(engine)
    for line in stdin:
        if not line.strip():
            continue
        out = server.handle_line(line)
        if out is not None:
            stdout.write(out + "\n")
            stdout.flush()
