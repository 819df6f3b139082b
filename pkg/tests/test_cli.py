"""Tests for the command-line surface, result files, and the classifier."""

import json

import pytest
from helpers import FIG1_SOURCE, write_package

from pointsto.cli import (
    VERDICT_MISMATCH,
    VERDICT_PARTIAL,
    VERDICT_TOTAL,
    classify_equivalence,
    cmd_compare,
    compare_results,
    dumps_result,
    load_result,
    loads_result,
    main,
    normalize_type_name,
    save_result,
)
from pointsto.typeinfer import Key


class TestResultFiles:
    def test_round_trip(self, tmp_path):
        result = {
            Key("m", "f", "x"): {"str", "int"},
            Key("m", "<module>", "y"): set(),
        }
        path = tmp_path / "out.json"
        save_result(result, path)
        assert load_result(path) == result

    def test_round_trip_byte_identical(self, tmp_path):
        result = {Key("m", "f", "x"): {"str", "int"}, Key("m", "g", "z"): {"list"}}
        first = dumps_result(result)
        second = dumps_result(loads_result(first))
        assert first == second

    def test_any_normalizes_to_empty_on_load(self):
        text = json.dumps({"m::f::x": ["Any"], "m::f::y": ["Any", "str"]})
        loaded = loads_result(text)
        assert loaded[Key("m", "f", "x")] == set()
        assert loaded[Key("m", "f", "y")] == {"str"}

    def test_malformed_key_rejected(self):
        with pytest.raises(ValueError):
            loads_result(json.dumps({"only-one-part": ["str"]}))

    def test_non_object_rejected(self):
        with pytest.raises(ValueError):
            loads_result(json.dumps([1, 2]))


class TestClassifier:
    def test_parametric_container_total_match(self):
        verdict = classify_equivalence({"Dict[str,int]"}, {"dict"})
        assert verdict.kind == VERDICT_TOTAL

    def test_partial_match(self):
        verdict = classify_equivalence({"str", "int"}, {"str"})
        assert verdict.kind == VERDICT_PARTIAL

    def test_mismatch(self):
        verdict = classify_equivalence({"str", "tuple"}, {"lighten"})
        assert verdict.kind == VERDICT_MISMATCH

    def test_requires_non_empty_sets(self):
        with pytest.raises(ValueError):
            classify_equivalence(set(), {"str"})

    def test_symmetry(self):
        cases = [
            ({"Dict[str,int]"}, {"dict"}),
            ({"str", "int"}, {"str"}),
            ({"str"}, {"lighten"}),
            ({"typing.List[int]"}, {"list"}),
        ]
        for left, right in cases:
            assert classify_equivalence(left, right).kind == classify_equivalence(right, left).kind

    def test_normalization(self):
        assert normalize_type_name("Dict[str, int]") == "dict"
        assert normalize_type_name("typing.List[int]") == "list"
        assert normalize_type_name("m.C") == "m.C"
        assert normalize_type_name("str") == "str"


class TestCompare:
    def test_identical_files_all_total(self, tmp_path):
        result = {Key("m", "f", "x"): {"str"}, Key("m", "f", "y"): {"dict"}}
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        save_result(result, a)
        save_result(result, b)
        counts, _, _ = compare_results(load_result(a), load_result(b))
        assert counts == {VERDICT_TOTAL: 2, VERDICT_PARTIAL: 0, VERDICT_MISMATCH: 0}

    def test_disjoint_keys_share_nothing(self):
        left = {Key("m", "f", "x"): {"str"}}
        right = {Key("m", "g", "y"): {"str"}}
        counts, _, _ = compare_results(left, right)
        assert sum(counts.values()) == 0

    def test_one_of_each_verdict(self):
        left = {
            Key("m", "f", "a"): {"Dict[str,int]"},
            Key("m", "f", "b"): {"str", "int"},
            Key("m", "f", "c"): {"str"},
        }
        right = {
            Key("m", "f", "a"): {"dict"},
            Key("m", "f", "b"): {"str"},
            Key("m", "f", "c"): {"lighten"},
        }
        counts, _, _ = compare_results(left, right)
        assert counts == {VERDICT_TOTAL: 1, VERDICT_PARTIAL: 1, VERDICT_MISMATCH: 1}

    def test_empty_keys_counted_per_side(self):
        left = {Key("m", "f", "a"): set(), Key("m", "f", "b"): {"str"}}
        right = {Key("m", "f", "b"): set()}
        _, empty_left, empty_right = compare_results(left, right)
        assert (empty_left, empty_right) == (1, 1)

    def test_cmd_compare_output(self, tmp_path, capsys):
        left = {
            Key("m", "f", "a"): {"Dict[str,int]"},
            Key("m", "f", "b"): {"str", "int"},
            Key("m", "f", "c"): {"str"},
        }
        right = {
            Key("m", "f", "a"): {"dict"},
            Key("m", "f", "b"): {"str"},
            Key("m", "f", "c"): {"lighten"},
        }
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        save_result(left, a)
        save_result(right, b)
        assert cmd_compare(str(a), str(b)) == 0
        out = capsys.readouterr().out
        assert "total match: 1" in out
        assert "partial match: 1" in out
        assert "mismatch: 1" in out

    def test_cmd_compare_malformed_file(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("not json", encoding="utf-8")
        good = tmp_path / "good.json"
        save_result({}, good)
        assert cmd_compare(str(bad), str(good)) != 0
        assert "cannot load" in capsys.readouterr().err


class TestAnalyzeCommand:
    def test_analyze_example_package(self, tmp_path, capsys):
        root = tmp_path / "pkg"
        root.mkdir()
        write_package(root, {"a.py": FIG1_SOURCE})
        out_file = tmp_path / "types.json"
        code = main(
            [
                str(root),
                "--entry",
                "a.main",
                "--no-concrete",
                "--output",
                str(out_file),
            ]
        )
        assert code == 0
        captured = capsys.readouterr().out
        assert "total keys:" in captured
        assert "coverage:" in captured
        loaded = load_result(out_file)
        assert Key("a", "validate", "url") in loaded

    def test_analyze_empty_package(self, tmp_path, capsys):
        root = tmp_path / "empty"
        root.mkdir()
        assert main([str(root), "--no-concrete"]) == 0
        assert "total keys: 0" in capsys.readouterr().out

    def test_missing_root_fails(self, tmp_path, capsys):
        assert main([str(tmp_path / "nope"), "--no-concrete"]) == 2

    def test_no_arguments_fails(self, capsys):
        assert main([]) == 2

    def test_compare_flag_dispatches(self, tmp_path, capsys):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        save_result({Key("m", "f", "x"): {"str"}}, a)
        save_result({Key("m", "f", "x"): {"str"}}, b)
        assert main(["--compare", str(a), str(b)]) == 0
        assert "total match: 1" in capsys.readouterr().out

    def test_coverage_percentage(self, tmp_path, capsys):
        root = tmp_path / "pkg"
        root.mkdir()
        write_package(root, {"m.py": "def f():\n    x = []\n    y = g()\n"})
        main([str(root), "--entry", "m.f", "--no-concrete"])
        out = capsys.readouterr().out
        lines = dict(
            line.split(": ") for line in out.strip().splitlines() if ": " in line
        )
        total = int(lines["total keys"])
        nonempty = int(lines["non-empty keys"])
        assert float(lines["coverage"].rstrip("%")) == pytest.approx(
            100.0 * nonempty / total, abs=0.05
        )
