"""Client side of the tool server: endpoints speaking newline-delimited JSON-RPC."""

from __future__ import annotations

import json
import subprocess
import sys
import threading
from typing import Any

from .mcp_server import McpServer, RpcError


class InProcessEndpoint:
    """Feeds request lines straight into an :class:`McpServer` in this process."""

    def __init__(self, server: McpServer | None = None):
        self.server = server or McpServer()
        self.transcript: list[tuple[str, str | None]] = []

    def exchange(self, line: str) -> str | None:
        out = self.server.handle_line(line)
        self.transcript.append((line, out))
        return out

    def close(self) -> None:
        pass


class StdioEndpoint:
    """Runs ``pddlsim serve`` (or ``argv``) as a subprocess and talks over its pipes."""

    def __init__(self, argv: list[str] | None = None, cwd: str | None = None):
        self.argv = argv or [sys.executable, "-m", "pddlsim", "serve"]
        self.proc = subprocess.Popen(self.argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                                     stderr=subprocess.DEVNULL, text=True, encoding="utf-8", bufsize=1, cwd=cwd)
        self.transcript: list[tuple[str, str | None]] = []
        self._lock = threading.Lock()

    def exchange(self, line: str) -> str | None:
        expects_reply = _expects_reply(line)
        with self._lock:
            self.proc.stdin.write(line + "\n")
            self.proc.stdin.flush()
            out = None
            if expects_reply:
                out = self.proc.stdout.readline()
                if not out:
                    raise ConnectionError("tool server closed its output stream")
                out = out.rstrip("\n")
        self.transcript.append((line, out))
        return out

    def close(self) -> None:
        if self.proc.poll() is None:
            self.proc.stdin.close()
            try:
                self.proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self.proc.kill()
                self.proc.wait()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def _expects_reply(line: str) -> bool:
    try:
        msg = json.loads(line)
    except json.JSONDecodeError:
        return True  # the server answers with a parse error
    return not (isinstance(msg, dict) and "id" not in msg)


class McpClient:
    def __init__(self, endpoint):
        self.endpoint = endpoint
        self._next_id = 0

    def request(self, method: str, params: dict | None = None) -> Any:
        self._next_id += 1
        msg = {"jsonrpc": "2.0", "id": self._next_id, "method": method}
        if params is not None:
            msg["params"] = params
        reply = json.loads(self.endpoint.exchange(json.dumps(msg, separators=(",", ":"))))
        if "error" in reply:
            err = reply["error"]
            raise RpcError(err.get("code", 0), err.get("message", ""), err.get("data"))
        return reply["result"]

    def notify(self, method: str, params: dict | None = None) -> None:
        msg = {"jsonrpc": "2.0", "method": method}
        if params is not None:
            msg["params"] = params
        self.endpoint.exchange(json.dumps(msg, separators=(",", ":")))

    def initialize(self) -> dict:
        result = self.request("initialize", {"protocolVersion": "2025-06-18", "capabilities": {},
                                             "clientInfo": {"name": "pddlsim-agent", "version": "0.1.0"}})
        self.notify("notifications/initialized")
        return result

    def list_tools(self) -> list[dict]:
        return self.request("tools/list")["tools"]

    def call_tool(self, name: str, arguments: dict) -> dict:
        return self.request("tools/call", {"name": name, "arguments": arguments})
