"""Evaluator interface, wire protocol, and sidecar-free fixture evaluator.

The solver and the translator consume an :class:`Evaluator`. The live
implementation (:class:`SidecarClient`) talks to an external interpreter
process over newline-delimited JSON, one request per line, one response per
line, strictly alternating. :class:`FixtureEvaluator` answers from a canned
script keyed by request fingerprints so the whole hybrid path is testable
without spawning anything.
"""

from __future__ import annotations

import ast
import json
import os
import select
import shlex
import subprocess
import sys
from dataclasses import dataclass
from typing import Iterable, Protocol, Sequence

DEFAULT_TIMEOUT_MS = 2000
DEFAULT_EVAL_BUDGET = 10_000

# Import roots whose evaluation is refused unless the caller opts out.
DEFAULT_DENYLIST = frozenset({"os", "subprocess", "shutil"})

# Protocol argument: either a live handle or an inline literal.
Argument = dict  # {"h": int} | {"lit": <json value>}


@dataclass(frozen=True)
class EvalRequest:
    op: str  # eval | getattr | call | describe
    expr: str | None = None
    handle: int | None = None
    name: str | None = None
    args: tuple = ()
    imports: tuple[str, ...] = ()


@dataclass(frozen=True)
class EvalResponse:
    ok: bool
    handle: int = 0
    type_name: str = ""
    repr_text: str = ""
    error: str = ""


def encode_request(req: EvalRequest) -> str:
    payload: dict = {"op": req.op}
    if req.op == "eval":
        payload["expr"] = req.expr
        payload["imports"] = list(req.imports)
    elif req.op == "getattr":
        payload["handle"] = req.handle
        payload["name"] = req.name
    elif req.op == "call":
        payload["handle"] = req.handle
        payload["args"] = list(req.args)
    return json.dumps(payload, sort_keys=True)


def decode_request(line: str) -> EvalRequest:
    payload = json.loads(line)
    return EvalRequest(
        op=payload["op"],
        expr=payload.get("expr"),
        handle=payload.get("handle"),
        name=payload.get("name"),
        args=tuple(payload.get("args", ())),
        imports=tuple(payload.get("imports", ())),
    )


def encode_response(resp: EvalResponse) -> str:
    if resp.ok:
        payload = {
            "ok": True,
            "handle": resp.handle,
            "type_name": resp.type_name,
            "repr": resp.repr_text,
        }
    else:
        payload = {"ok": False, "error": resp.error}
    return json.dumps(payload, sort_keys=True)


def decode_response(line: str) -> EvalResponse:
    payload = json.loads(line)
    if payload.get("ok"):
        return EvalResponse(
            ok=True,
            handle=int(payload["handle"]),
            type_name=payload["type_name"],
            repr_text=payload.get("repr", ""),
        )
    return EvalResponse(ok=False, error=payload.get("error", ""))


def request_fingerprint(req: EvalRequest) -> str:
    """Canonical identity of a request; fixture scripts key on this."""
    return encode_request(req)


class Evaluator(Protocol):
    def eval_expr(self, expr: str, imports: Sequence[str]) -> EvalResponse: ...

    def get_attr(self, handle: int, name: str) -> EvalResponse: ...

    def call_handle(self, handle: int, args: Sequence[Argument]) -> EvalResponse: ...

    def close(self) -> None: ...


_FAIL = EvalResponse(ok=False, error="concrete evaluation unavailable")


class NullEvaluator:
    """Always-failing evaluator: yields the purely abstract analysis."""

    def eval_expr(self, expr: str, imports: Sequence[str]) -> EvalResponse:
        return _FAIL

    def get_attr(self, handle: int, name: str) -> EvalResponse:
        return _FAIL

    def call_handle(self, handle: int, args: Sequence[Argument]) -> EvalResponse:
        return _FAIL

    def close(self) -> None:
        pass


class FixtureEvaluator:
    """Deterministic evaluator answering only scripted request fingerprints."""

    def __init__(self, script: dict[str, EvalResponse] | None = None):
        self.script = dict(script or {})
        self.requests: list[EvalRequest] = []

    @classmethod
    def from_transcript(
        cls, pairs: Iterable[tuple[EvalRequest, EvalResponse]]
    ) -> "FixtureEvaluator":
        """Replay a recorded live session as a fixture script."""
        return cls({request_fingerprint(req): resp for req, resp in pairs})

    def expect(self, req: EvalRequest, resp: EvalResponse) -> "FixtureEvaluator":
        self.script[request_fingerprint(req)] = resp
        return self

    def _answer(self, req: EvalRequest) -> EvalResponse:
        self.requests.append(req)
        return self.script.get(request_fingerprint(req), EvalResponse(ok=False, error="unscripted"))

    def eval_expr(self, expr: str, imports: Sequence[str]) -> EvalResponse:
        return self._answer(EvalRequest(op="eval", expr=expr, imports=tuple(imports)))

    def get_attr(self, handle: int, name: str) -> EvalResponse:
        return self._answer(EvalRequest(op="getattr", handle=handle, name=name))

    def call_handle(self, handle: int, args: Sequence[Argument]) -> EvalResponse:
        return self._answer(EvalRequest(op="call", handle=handle, args=tuple(args)))

    def close(self) -> None:
        pass


class BudgetedEvaluator:
    """Caps the number of requests forwarded to the wrapped evaluator.

    Once the budget is spent every request fails, which degrades the run to
    the abstract-only analysis instead of stalling on a large package.
    """

    def __init__(self, inner: Evaluator, budget: int = DEFAULT_EVAL_BUDGET):
        self.inner = inner
        self.remaining = budget

    def _spend(self) -> bool:
        if self.remaining <= 0:
            return False
        self.remaining -= 1
        return True

    def eval_expr(self, expr: str, imports: Sequence[str]) -> EvalResponse:
        if not self._spend():
            return EvalResponse(ok=False, error="evaluation budget exhausted")
        return self.inner.eval_expr(expr, imports)

    def get_attr(self, handle: int, name: str) -> EvalResponse:
        if not self._spend():
            return EvalResponse(ok=False, error="evaluation budget exhausted")
        return self.inner.get_attr(handle, name)

    def call_handle(self, handle: int, args: Sequence[Argument]) -> EvalResponse:
        if not self._spend():
            return EvalResponse(ok=False, error="evaluation budget exhausted")
        return self.inner.call_handle(handle, args)

    def close(self) -> None:
        self.inner.close()


class CachingEvaluator:
    """Memoizes every request kind on its fingerprint.

    Identical expressions recur across a package, and the solver revisits
    statements until fixpoint. Without the memo a live session would mint a
    fresh handle for every revisit, growing points-to sets forever; with it,
    repeated requests return the same handle and the fixpoint is stable.
    """

    def __init__(self, inner: Evaluator):
        self.inner = inner
        self._cache: dict[str, EvalResponse] = {}

    def _memo(self, req: EvalRequest, run) -> EvalResponse:
        key = request_fingerprint(req)
        if key not in self._cache:
            self._cache[key] = run()
        return self._cache[key]

    def eval_expr(self, expr: str, imports: Sequence[str]) -> EvalResponse:
        req = EvalRequest(op="eval", expr=expr, imports=tuple(imports))
        return self._memo(req, lambda: self.inner.eval_expr(expr, imports))

    def get_attr(self, handle: int, name: str) -> EvalResponse:
        req = EvalRequest(op="getattr", handle=handle, name=name)
        return self._memo(req, lambda: self.inner.get_attr(handle, name))

    def call_handle(self, handle: int, args: Sequence[Argument]) -> EvalResponse:
        req = EvalRequest(op="call", handle=handle, args=tuple(args))
        return self._memo(req, lambda: self.inner.call_handle(handle, args))

    def close(self) -> None:
        self.inner.close()


def make_evaluator(base: Evaluator, budget: int = DEFAULT_EVAL_BUDGET) -> Evaluator:
    """Standard stack: memoized on top of a budget cap on top of ``base``."""
    return CachingEvaluator(BudgetedEvaluator(base, budget))


def _mentions_denied_root(expr: str, denylist: frozenset[str]) -> bool:
    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError:
        return False
    return any(
        isinstance(node, ast.Name) and node.id in denylist for node in ast.walk(tree)
    )


class SidecarClient:
    """Client half of the wire protocol, talking to a spawned interpreter.

    The child is spawned with the analyzed package's root prepended to its
    import path. A ``describe`` health check must be answered before the
    first evaluation. One request is in flight at a time; if the child stops
    answering, the client marks the session dead and fails every later
    request rather than desynchronizing the stream.
    """

    def __init__(
        self,
        command: Sequence[str] | None = None,
        package_root: str | None = None,
        timeout_ms: int = DEFAULT_TIMEOUT_MS,
        denylist: frozenset[str] = DEFAULT_DENYLIST,
    ):
        self.command = list(command) if command else default_sidecar_command()
        self.timeout_ms = timeout_ms
        self.denylist = denylist
        self._dead = False

        env = dict(os.environ)
        if package_root is not None:
            existing = env.get("PYTHONPATH", "")
            env["PYTHONPATH"] = (
                f"{package_root}{os.pathsep}{existing}" if existing else str(package_root)
            )
        self._proc = subprocess.Popen(
            self.command,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            env=env,
            text=True,
            bufsize=1,
        )
        health = self._roundtrip(EvalRequest(op="describe"))
        if not health.ok:
            self.close()
            raise RuntimeError(f"sidecar health check failed: {health.error}")

    def _roundtrip(self, req: EvalRequest) -> EvalResponse:
        if self._dead or self._proc.poll() is not None:
            return EvalResponse(ok=False, error="sidecar session is not live")
        try:
            assert self._proc.stdin is not None and self._proc.stdout is not None
            self._proc.stdin.write(encode_request(req) + "\n")
            self._proc.stdin.flush()
            # The sidecar enforces its own per-request timeout, so a healthy
            # session always answers; the grace period covers a dead child.
            deadline = self.timeout_ms / 1000.0 + 1.0
            ready, _, _ = select.select([self._proc.stdout], [], [], deadline)
            if not ready:
                self._dead = True
                return EvalResponse(ok=False, error="timeout")
            line = self._proc.stdout.readline()
        except (OSError, ValueError) as exc:
            self._dead = True
            return EvalResponse(ok=False, error=f"sidecar i/o error: {exc}")
        if not line:
            self._dead = True
            return EvalResponse(ok=False, error="sidecar closed the stream")
        try:
            return decode_response(line)
        except (ValueError, KeyError):
            self._dead = True
            return EvalResponse(ok=False, error="malformed sidecar response")

    def eval_expr(self, expr: str, imports: Sequence[str]) -> EvalResponse:
        if _mentions_denied_root(expr, self.denylist):
            return EvalResponse(ok=False, error="denied import root")
        safe_imports = tuple(
            stmt for stmt in imports if not _import_hits_denylist(stmt, self.denylist)
        )
        return self._roundtrip(EvalRequest(op="eval", expr=expr, imports=safe_imports))

    def get_attr(self, handle: int, name: str) -> EvalResponse:
        return self._roundtrip(EvalRequest(op="getattr", handle=handle, name=name))

    def call_handle(self, handle: int, args: Sequence[Argument]) -> EvalResponse:
        return self._roundtrip(EvalRequest(op="call", handle=handle, args=tuple(args)))

    def close(self) -> None:
        if self._proc.poll() is None:
            try:
                if self._proc.stdin:
                    self._proc.stdin.close()
                self._proc.wait(timeout=2)
            except (OSError, subprocess.TimeoutExpired):
                self._proc.kill()
        self._dead = True


def _import_hits_denylist(stmt: str, denylist: frozenset[str]) -> bool:
    try:
        tree = ast.parse(stmt)
    except SyntaxError:
        return True
    for node in ast.walk(tree):
        if isinstance(node, ast.Import):
            if any(alias.name.split(".")[0] in denylist for alias in node.names):
                return True
        elif isinstance(node, ast.ImportFrom):
            if node.module and node.module.split(".")[0] in denylist:
                return True
    return False


SIDECAR_COMMAND_ENV = "POINTSTO_SIDECAR"


def default_sidecar_command() -> list[str]:
    """Launch command for the evaluation service, overridable by env var."""
    override = os.environ.get(SIDECAR_COMMAND_ENV)
    if override:
        return shlex.split(override)
    return [sys.executable, "-m", "pointsto_sidecar"]
