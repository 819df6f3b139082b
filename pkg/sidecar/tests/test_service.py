"""Protocol-level tests against a spawned service process."""

import json
import subprocess
import sys

import pytest
from pointsto_sidecar.service import EvaluationService, HandleRegistry


class SessionProcess:
    """Raw line-oriented client used only by these tests."""

    def __init__(self, extra_args=(), env=None):
        self.proc = subprocess.Popen(
            [sys.executable, "-m", "pointsto_sidecar", *extra_args],
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            env=env,
            text=True,
            bufsize=1,
        )

    def send(self, payload) -> dict:
        line = payload if isinstance(payload, str) else json.dumps(payload)
        self.proc.stdin.write(line + "\n")
        self.proc.stdin.flush()
        return json.loads(self.proc.stdout.readline())

    def close(self):
        self.proc.stdin.close()
        self.proc.wait(timeout=5)


@pytest.fixture
def session():
    proc = SessionProcess()
    yield proc
    proc.close()


class TestServeBasics:
    def test_describe_health_check(self, session):
        response = session.send({"op": "describe"})
        assert response["ok"] is True
        assert response["handle"] == 0

    def test_eval_arithmetic(self, session):
        response = session.send({"op": "eval", "expr": "1+1", "imports": []})
        assert response["ok"] is True
        assert response["type_name"] == "int"
        assert response["repr"] == "2"
        assert response["handle"] >= 1

    def test_eval_in_import_environment(self, session):
        response = session.send(
            {"op": "eval", "expr": "re.compile(r'p')", "imports": ["import re"]}
        )
        assert response["ok"] is True
        assert response["type_name"] == "re.Pattern"

    def test_getattr_call_chain_yields_match(self, session):
        pattern = session.send(
            {"op": "eval", "expr": "re.compile(r'p')", "imports": ["import re"]}
        )
        matcher = session.send({"op": "getattr", "handle": pattern["handle"], "name": "match"})
        assert matcher["ok"] is True
        text = session.send({"op": "eval", "expr": "'p abcd'", "imports": ["import re"]})
        match = session.send(
            {"op": "call", "handle": matcher["handle"], "args": [{"h": text["handle"]}]}
        )
        assert match["ok"] is True
        assert match["type_name"] == "re.Match"

    def test_literal_arguments(self, session):
        length = session.send({"op": "eval", "expr": "len", "imports": []})
        response = session.send(
            {"op": "call", "handle": length["handle"], "args": [{"lit": "abc"}]}
        )
        assert response["ok"] is True and response["repr"] == "3"

    def test_unbound_name_fails(self, session):
        response = session.send({"op": "eval", "expr": "undefined_name", "imports": []})
        assert response["ok"] is False
        assert "NameError" in response["error"]

    def test_missing_attribute_fails(self, session):
        number = session.send({"op": "eval", "expr": "1", "imports": []})
        response = session.send(
            {"op": "getattr", "handle": number["handle"], "name": "no_such_attr"}
        )
        assert response["ok"] is False

    def test_calling_non_callable_fails(self, session):
        number = session.send({"op": "eval", "expr": "1", "imports": []})
        response = session.send({"op": "call", "handle": number["handle"], "args": []})
        assert response["ok"] is False
        assert "TypeError" in response["error"]

    def test_exception_inside_call_is_reported(self, session):
        thrower = session.send(
            {"op": "eval", "expr": "(lambda: [].pop())", "imports": []}
        )
        response = session.send({"op": "call", "handle": thrower["handle"], "args": []})
        assert response["ok"] is False
        assert "IndexError" in response["error"]

    def test_malformed_message_keeps_session_alive(self, session):
        response = session.send("this is not json")
        assert response["ok"] is False
        assert "protocol error" in response["error"]
        follow_up = session.send({"op": "eval", "expr": "2*3", "imports": []})
        assert follow_up["ok"] is True and follow_up["repr"] == "6"

    def test_unknown_op_rejected(self, session):
        response = session.send({"op": "shutdown"})
        assert response["ok"] is False

    def test_repr_truncated(self, session):
        response = session.send({"op": "eval", "expr": "'x' * 1000", "imports": []})
        assert response["ok"] is True
        assert len(response["repr"]) <= 256

    def test_broken_import_leaves_namespace_usable(self, session):
        response = session.send(
            {
                "op": "eval",
                "expr": "json.dumps([])",
                "imports": ["import definitely_not_a_module", "import json"],
            }
        )
        assert response["ok"] is True and response["repr"] == "'[]'"


class TestTimeout:
    def test_timeout_fails_request_but_session_survives(self):
        session = SessionProcess(extra_args=["--timeout-ms", "300"])
        try:
            slow = session.send(
                {
                    "op": "eval",
                    "expr": "[x for x in iter(int, 1)]",
                    "imports": [],
                }
            )
            assert slow["ok"] is False
            assert slow["error"] == "timeout"
            after = session.send({"op": "eval", "expr": "1+1", "imports": []})
            assert after["ok"] is True
        finally:
            session.close()


class TestHandleRegistry:
    def test_ids_start_after_reserved_zero(self):
        registry = HandleRegistry()
        assert registry.register("a") == 1
        assert registry.register("b") == 2

    def test_ids_never_reused(self):
        registry = HandleRegistry()
        first = registry.register("a")
        second = registry.register("b")
        assert first != second
        assert registry.get(first) == "a"

    def test_registry_grows_monotonically(self):
        service = EvaluationService()
        before = len(service.registry)
        service.handle_line(json.dumps({"op": "eval", "expr": "1", "imports": []}))
        service.handle_line(json.dumps({"op": "eval", "expr": "2", "imports": []}))
        assert len(service.registry) == before + 2


class TestResponsePairing:
    def test_every_request_gets_exactly_one_response(self, session):
        for index in range(20):
            response = session.send({"op": "eval", "expr": str(index), "imports": []})
            assert response["ok"] is True
            assert response["repr"] == str(index)
