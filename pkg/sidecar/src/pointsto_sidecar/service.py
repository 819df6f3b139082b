"""Evaluation service hosted in a live interpreter.

Speaks newline-delimited JSON over stdin/stdout, one request per line, one
response per line, strictly alternating:

    {"op": "describe"}
    {"op": "eval", "expr": "...", "imports": ["import re", ...]}
    {"op": "getattr", "handle": N, "name": "..."}
    {"op": "call", "handle": N, "args": [{"h": M} | {"lit": ...}, ...]}

Successful responses carry a fresh handle into the session's registry plus
the value's qualified type name and truncated repr. The service never
crashes on a malformed request and survives per-request timeouts.
"""

from __future__ import annotations

import json
import signal
import sys

REPR_LIMIT = 256
DEFAULT_TIMEOUT_MS = 2000


class HandleRegistry:
    """Live objects by session-scoped id; 0 is reserved, ids never reused."""

    def __init__(self) -> None:
        self._objects: dict[int, object] = {}
        self._next_id = 1

    def register(self, value: object) -> int:
        handle = self._next_id
        self._next_id += 1
        self._objects[handle] = value
        return handle

    def get(self, handle: int) -> object:
        return self._objects[handle]

    def __contains__(self, handle: int) -> bool:
        return handle in self._objects

    def __len__(self) -> int:
        return len(self._objects)


class _RequestTimeout(Exception):
    pass


def _raise_timeout(signum, frame):
    raise _RequestTimeout()


def qualified_type_name(value: object) -> str:
    kind = type(value)
    module = getattr(kind, "__module__", "")
    if not module or module == "builtins":
        return kind.__qualname__
    return f"{module}.{kind.__qualname__}"


def _ok(handle: int, value: object) -> str:
    try:
        rendered = repr(value)
    except Exception as exc:  # repr itself may raise
        rendered = f"<unreprable {type(exc).__name__}>"
    return json.dumps(
        {
            "ok": True,
            "handle": handle,
            "type_name": qualified_type_name(value),
            "repr": rendered[:REPR_LIMIT],
        },
        sort_keys=True,
    )


def _err(message: str) -> str:
    return json.dumps({"ok": False, "error": message}, sort_keys=True)


class EvaluationService:
    def __init__(self, timeout_ms: int = DEFAULT_TIMEOUT_MS) -> None:
        self.registry = HandleRegistry()
        self.timeout_ms = timeout_ms
        self._namespaces: dict[tuple[str, ...], dict] = {}
        self._alarm_available = hasattr(signal, "SIGALRM")
        if self._alarm_available:
            signal.signal(signal.SIGALRM, _raise_timeout)

    # -- request handling ------------------------------------------------

    def handle_line(self, line: str) -> str:
        try:
            payload = json.loads(line)
            if not isinstance(payload, dict) or "op" not in payload:
                return _err("protocol error: not a request object")
        except ValueError:
            return _err("protocol error: invalid message")
        try:
            return self._dispatch(payload)
        except _RequestTimeout:
            return _err("timeout")
        except BaseException as exc:  # never crash the session
            return _err(f"{type(exc).__name__}: {exc}")

    def _dispatch(self, payload: dict) -> str:
        op = payload["op"]
        if op == "describe":
            return json.dumps(
                {"ok": True, "handle": 0, "type_name": "service", "repr": "evaluation service"},
                sort_keys=True,
            )
        if op == "eval":
            return self._do_eval(payload.get("expr", ""), tuple(payload.get("imports", ())))
        if op == "getattr":
            return self._do_getattr(payload.get("handle"), payload.get("name", ""))
        if op == "call":
            return self._do_call(payload.get("handle"), payload.get("args", ()))
        return _err(f"protocol error: unknown op {op!r}")

    # -- operations --------------------------------------------------------

    def _namespace(self, imports: tuple[str, ...]) -> dict:
        """Fresh namespace seeded by executing the import statements only."""
        if imports not in self._namespaces:
            namespace: dict = {}
            for statement in imports:
                try:
                    exec(statement, namespace)  # noqa: S102 - that is the job
                except BaseException:
                    continue  # a broken import leaves the rest usable
            self._namespaces[imports] = namespace
        return self._namespaces[imports]

    def _with_timeout(self, run):
        if not self._alarm_available:
            return run()
        signal.setitimer(signal.ITIMER_REAL, self.timeout_ms / 1000.0)
        try:
            return run()
        finally:
            signal.setitimer(signal.ITIMER_REAL, 0)

    def _do_eval(self, expr: str, imports: tuple[str, ...]) -> str:
        namespace = self._namespace(imports)
        value = self._with_timeout(lambda: eval(expr, dict(namespace)))  # noqa: S307
        return _ok(self.registry.register(value), value)

    def _do_getattr(self, handle, name: str) -> str:
        if handle not in self.registry:
            return _err(f"unknown handle {handle}")
        value = self._with_timeout(lambda: getattr(self.registry.get(handle), name))
        return _ok(self.registry.register(value), value)

    def _do_call(self, handle, raw_args) -> str:
        if handle not in self.registry:
            return _err(f"unknown handle {handle}")
        args = []
        for raw in raw_args:
            if isinstance(raw, dict) and "h" in raw:
                if raw["h"] not in self.registry:
                    return _err(f"unknown handle {raw['h']}")
                args.append(self.registry.get(raw["h"]))
            elif isinstance(raw, dict) and "lit" in raw:
                args.append(raw["lit"])
            else:
                return _err("protocol error: bad argument encoding")
        target = self.registry.get(handle)
        value = self._with_timeout(lambda: target(*args))
        return _ok(self.registry.register(value), value)


def serve(stdin=None, stdout=None, timeout_ms: int = DEFAULT_TIMEOUT_MS) -> None:
    """Answer requests until end-of-input."""
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    service = EvaluationService(timeout_ms)
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        stdout.write(service.handle_line(line) + "\n")
        stdout.flush()
