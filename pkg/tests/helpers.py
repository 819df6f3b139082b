"""Shared builders for the test suite."""

from __future__ import annotations

from pathlib import Path
from types import SimpleNamespace

from pointsto.concrete import (
    CachingEvaluator,
    EvalRequest,
    EvalResponse,
    FixtureEvaluator,
    NullEvaluator,
)
from pointsto.diagnostics import Diagnostics
from pointsto.frontend import (
    build_module_imports,
    classify_imports,
    init_global_env,
    parse_package,
)
from pointsto.hierarchy import build_hierarchy, seed_metaclass_objects
from pointsto.objects import PointsToGraph
from pointsto.solver import Solver
from pointsto.tac import Translator, VariableAllocator, module_init_info

FIG1_SOURCE = """\
import re

def url_regex():
    regex_cache = None
    if regex_cache is None:
        regex_cache = re.compile(r"p")
    return regex_cache

def str_validator(value):
    if isinstance(value, str):
        return value.value
    else:
        return value

def validate(value):
    url = str_validator(value)
    m = url_regex().match(url)
    if m.end() != len(url):
        raise Exception(m.end())

def main():
    validate("p abcd")
"""


def write_package(root: Path, files: dict[str, str]) -> Path:
    for relative, source in files.items():
        path = root / relative
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(source, encoding="utf-8")
    return root


def fig1_files() -> dict[str, str]:
    return {"a.py": FIG1_SOURCE}


def fig1_evaluator() -> FixtureEvaluator:
    """Scripted responses for the regex-validation example's hybrid path."""
    imports = ("import re",)
    fx = FixtureEvaluator()
    fx.expect(
        EvalRequest(op="eval", expr="re.compile('p')", imports=imports),
        EvalResponse(ok=True, handle=1, type_name="re.Pattern", repr_text="re.compile('p')"),
    )
    fx.expect(
        EvalRequest(op="eval", expr="'p abcd'", imports=imports),
        EvalResponse(ok=True, handle=2, type_name="str", repr_text="'p abcd'"),
    )
    fx.expect(
        EvalRequest(op="eval", expr="None", imports=imports),
        EvalResponse(ok=True, handle=3, type_name="NoneType", repr_text="None"),
    )
    fx.expect(
        EvalRequest(op="getattr", handle=1, name="match"),
        EvalResponse(
            ok=True,
            handle=4,
            type_name="builtins.builtin_function_or_method",
            repr_text="<built-in method match of re.Pattern object>",
        ),
    )
    fx.expect(
        EvalRequest(op="call", handle=4, args=({"h": 2},)),
        EvalResponse(ok=True, handle=5, type_name="re.Match", repr_text="<re.Match object; span=(0, 1)>"),
    )
    return fx


def make_world(root: Path, files: dict[str, str], evaluator=None, echo: bool = False):
    """Build every analysis component for a small in-tree package."""
    write_package(root, files)
    diagnostics = Diagnostics(echo=echo)
    units = parse_package(root, diagnostics=diagnostics)
    records = classify_imports(units, diagnostics)
    module_imports = build_module_imports(units, records)
    allocator = VariableAllocator()
    global_env = init_global_env(units, allocator, diagnostics)
    graph = PointsToGraph()
    hierarchy = build_hierarchy(units, module_imports, diagnostics)
    seed_metaclass_objects(hierarchy, global_env, graph, diagnostics)
    wrapped = CachingEvaluator(evaluator if evaluator is not None else NullEvaluator())
    translator = Translator(
        global_env=global_env,
        module_imports=module_imports,
        module_names={u.module_name for u in units},
        evaluator=wrapped,
        allocator=allocator,
        diagnostics=diagnostics,
    )
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
    return SimpleNamespace(
        root=root,
        diagnostics=diagnostics,
        units=units,
        records=records,
        module_imports=module_imports,
        allocator=allocator,
        global_env=global_env,
        graph=graph,
        hierarchy=hierarchy,
        translator=translator,
        solver=solver,
        module_inits=module_inits,
    )


def find_translated(table, qualname: str):
    for func, translated in table.items():
        if func.qualname == qualname:
            return translated
    raise KeyError(qualname)


def env_var(translated, name: str):
    var = translated.env.lookup(name)
    if var is None:
        raise KeyError(name)
    return var
