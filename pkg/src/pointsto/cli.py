"""Command-line surface: analyze a package, compare two result files.

Result files are JSON maps with keys encoded as ``module::function::variable``
and values as sorted type-name lists, so files diff stably and round-trip
byte-identically. On load, the trivial ``Any`` type is normalized away: a
key whose only information is ``Any`` is an empty key.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .concrete import (
    DEFAULT_EVAL_BUDGET,
    DEFAULT_TIMEOUT_MS,
    Evaluator,
    NullEvaluator,
    SidecarClient,
    make_evaluator,
)
from .diagnostics import Diagnostics
from .frontend import (
    DEFAULT_TEST_DIRS,
    GlobalEnv,
    ModuleUnit,
    build_module_imports,
    classify_imports,
    discover_entry_points,
    init_global_env,
    parse_package,
)
from .hierarchy import Hierarchy, build_hierarchy, seed_metaclass_objects
from .objects import PointsToGraph
from .solver import Solver
from .tac import FunctionInfo, FunctionTable, Translator, VariableAllocator, module_init_info
from .typeinfer import Key, KeyedTypeResult, infer_types, merge, shallow_scan

VERDICT_TOTAL = "total_match"
VERDICT_PARTIAL = "partial_match"
VERDICT_MISMATCH = "mismatch"

_CONTAINER_NAMES = {"dict", "list", "set", "tuple", "frozenset"}


@dataclass
class EquivalenceVerdict:
    kind: str  # total_match | partial_match | mismatch
    left: frozenset[str]
    right: frozenset[str]


@dataclass
class AnalysisResult:
    units: list[ModuleUnit]
    global_env: GlobalEnv
    hierarchy: Hierarchy
    graph: PointsToGraph
    table: FunctionTable
    entry_points: list[FunctionInfo]
    types: KeyedTypeResult
    diagnostics: Diagnostics
    elapsed: float = 0.0
    primary_types: KeyedTypeResult = field(default_factory=dict)
    shallow_types: KeyedTypeResult = field(default_factory=dict)


def run_analysis(
    root: Path | str,
    entries: Sequence[str] = (),
    evaluator: Evaluator | None = None,
    tests_dirs: Sequence[str] = DEFAULT_TEST_DIRS,
    eval_budget: int = DEFAULT_EVAL_BUDGET,
    diagnostics: Diagnostics | None = None,
) -> AnalysisResult:
    """Full pipeline: parse, build environments, solve, infer types."""
    started = time.perf_counter()
    if diagnostics is None:
        diagnostics = Diagnostics()
    wrapped = make_evaluator(evaluator or NullEvaluator(), eval_budget)

    units = parse_package(root, tests_dirs, diagnostics)
    records = classify_imports(units, diagnostics)
    module_imports = build_module_imports(units, records)
    allocator = VariableAllocator()
    global_env = init_global_env(units, allocator, diagnostics)

    graph = PointsToGraph()
    hierarchy = build_hierarchy(units, module_imports, diagnostics)
    seed_metaclass_objects(hierarchy, global_env, graph, diagnostics)

    translator = Translator(
        global_env=global_env,
        module_imports=module_imports,
        module_names={u.module_name for u in units},
        evaluator=wrapped,
        allocator=allocator,
        diagnostics=diagnostics,
    )
    entry_points = discover_entry_points(units, entries, diagnostics)
    module_inits = [
        module_init_info(u.module_name, u.tree, str(u.source_path)) for u in units
    ]
    solver = Solver(
        graph=graph,
        hierarchy=hierarchy,
        translate=translator.translate_function,
        evaluator=wrapped,
        diagnostics=diagnostics,
        module_inits=module_inits,
    )
    solver.run(entry_points)

    test_modules = {u.module_name for u in units if u.is_test}
    primary = infer_types(graph, solver.table, global_env, exclude_modules=test_modules)
    shallow = shallow_scan(units)
    types = merge(primary, shallow)
    wrapped.close()

    return AnalysisResult(
        units=units,
        global_env=global_env,
        hierarchy=hierarchy,
        graph=graph,
        table=solver.table,
        entry_points=entry_points,
        types=types,
        diagnostics=diagnostics,
        elapsed=time.perf_counter() - started,
        primary_types=primary,
        shallow_types=shallow,
    )


# -- result files -------------------------------------------------------


def dumps_result(result: KeyedTypeResult) -> str:
    encoded = {
        f"{key.module}::{key.function}::{key.variable}": sorted(types)
        for key, types in result.items()
    }
    return json.dumps(encoded, indent=2, sort_keys=True) + "\n"


def save_result(result: KeyedTypeResult, path: Path | str) -> None:
    Path(path).write_text(dumps_result(result), encoding="utf-8")


def loads_result(text: str) -> KeyedTypeResult:
    encoded = json.loads(text)
    if not isinstance(encoded, dict):
        raise ValueError("result file must contain a JSON object")
    result: KeyedTypeResult = {}
    for raw_key, raw_types in encoded.items():
        parts = raw_key.split("::", 2)
        if len(parts) != 3:
            raise ValueError(f"malformed key {raw_key!r}")
        types = {t for t in raw_types if t != "Any"}
        result[Key(*parts)] = types
    return result


def load_result(path: Path | str) -> KeyedTypeResult:
    return loads_result(Path(path).read_text(encoding="utf-8"))


# -- equivalence --------------------------------------------------------


def normalize_type_name(name: str) -> str:
    """Fold parametric suffixes and container capitalizations away."""
    base = name.split("[", 1)[0].strip()
    tail = base.rsplit(".", 1)[-1]
    if tail.lower() in _CONTAINER_NAMES:
        return tail.lower()
    return base


def classify_equivalence(left: set[str], right: set[str]) -> EquivalenceVerdict:
    """Total, partial, or mismatch over normalized top-level names."""
    if not left or not right:
        raise ValueError("equivalence is only defined for non-empty type sets")
    normalized_left = frozenset(normalize_type_name(t) for t in left)
    normalized_right = frozenset(normalize_type_name(t) for t in right)
    if normalized_left == normalized_right:
        kind = VERDICT_TOTAL
    elif normalized_left & normalized_right:
        kind = VERDICT_PARTIAL
    else:
        kind = VERDICT_MISMATCH
    return EquivalenceVerdict(kind, normalized_left, normalized_right)


def compare_results(
    left: KeyedTypeResult, right: KeyedTypeResult
) -> tuple[dict[str, int], int, int]:
    """Verdict counts over shared non-empty keys, plus empty counts."""
    counts = {VERDICT_TOTAL: 0, VERDICT_PARTIAL: 0, VERDICT_MISMATCH: 0}
    for key in left.keys() & right.keys():
        if left[key] and right[key]:
            verdict = classify_equivalence(left[key], right[key])
            counts[verdict.kind] += 1
    empty_left = sum(1 for types in left.values() if not types)
    empty_right = sum(1 for types in right.values() if not types)
    return counts, empty_left, empty_right


# -- commands -----------------------------------------------------------


def cmd_analyze(args: argparse.Namespace) -> int:
    root = Path(args.root)
    if not root.exists():
        print(f"error: analysis root does not exist: {root}", file=sys.stderr)
        return 2

    diagnostics = Diagnostics()
    evaluator: Evaluator
    if args.no_concrete:
        evaluator = NullEvaluator()
    else:
        try:
            evaluator = SidecarClient(
                package_root=str(root), timeout_ms=args.timeout_ms
            )
        except (OSError, RuntimeError) as exc:
            diagnostics.report(str(root), 0, f"sidecar unavailable, abstract only: {exc}")
            evaluator = NullEvaluator()

    result = run_analysis(
        root,
        entries=args.entry,
        evaluator=evaluator,
        tests_dirs=tuple(args.tests_dir) or DEFAULT_TEST_DIRS,
        eval_budget=args.eval_budget,
        diagnostics=diagnostics,
    )

    if args.output:
        save_result(result.types, args.output)
    total = len(result.types)
    nonempty = sum(1 for types in result.types.values() if types)
    percent = (100.0 * nonempty / total) if total else 0.0
    print(f"total keys: {total}")
    print(f"non-empty keys: {nonempty}")
    print(f"coverage: {percent:.1f}%")
    return 0


def cmd_compare(path_a: str, path_b: str) -> int:
    try:
        left = load_result(path_a)
        right = load_result(path_b)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: cannot load result file: {exc}", file=sys.stderr)
        return 2
    counts, empty_left, empty_right = compare_results(left, right)
    shared = sum(counts.values())
    print(f"shared non-empty keys: {shared}")
    print(f"total match: {counts[VERDICT_TOTAL]}")
    print(f"partial match: {counts[VERDICT_PARTIAL]}")
    print(f"mismatch: {counts[VERDICT_MISMATCH]}")
    print(f"empty keys: {empty_left} (left), {empty_right} (right)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pointsto",
        description="Points-to analysis and type inference for Python packages.",
    )
    parser.add_argument("root", nargs="?", help="package root to analyze")
    parser.add_argument(
        "--entry",
        action="append",
        default=[],
        metavar="NAME",
        help="extra entry function (repeatable), e.g. pkg.mod.main",
    )
    parser.add_argument(
        "--tests-dir",
        action="append",
        default=[],
        metavar="PATH",
        help="directory name treated as a test directory (repeatable)",
    )
    parser.add_argument(
        "--no-concrete",
        action="store_true",
        help="disable concrete evaluation (abstract-only analysis)",
    )
    parser.add_argument("--eval-budget", type=int, default=DEFAULT_EVAL_BUDGET)
    parser.add_argument("--timeout-ms", type=int, default=DEFAULT_TIMEOUT_MS)
    parser.add_argument("--output", metavar="FILE", help="write the result file here")
    parser.add_argument(
        "--compare",
        nargs=2,
        metavar=("A", "B"),
        help="compare two result files instead of analyzing",
    )
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.compare:
        return cmd_compare(args.compare[0], args.compare[1])
    if not args.root:
        build_parser().print_usage(sys.stderr)
        print("error: a package root or --compare is required", file=sys.stderr)
        return 2
    return cmd_analyze(args)


if __name__ == "__main__":
    raise SystemExit(main())
