"""Keyed type sets derived from the points-to graph, plus the shallow scan.

A key is a (module, function, variable) triple; module scope uses the
function name ``<module>``. An empty set means the key is known but no type
was inferred. Container types are reported by their top-level name only.
"""

from __future__ import annotations

import ast
from typing import TYPE_CHECKING, Iterable, NamedTuple

from .objects import ConstObject, DataObject, MetaClsObject, MetaFuncObject, PointsToGraph
from .tac import MODULE_SCOPE, FunctionTable

if TYPE_CHECKING:
    from .frontend import GlobalEnv, ModuleUnit


class Key(NamedTuple):
    module: str
    function: str
    variable: str


KeyedTypeResult = dict[Key, set[str]]

BUILTIN_CONSTRUCTORS = {
    "list",
    "dict",
    "set",
    "tuple",
    "str",
    "int",
    "float",
    "bool",
    "frozenset",
}

_LITERAL_NODE_TYPES = {
    ast.List: "list",
    ast.Tuple: "tuple",
    ast.Set: "set",
    ast.Dict: "dict",
    ast.JoinedStr: "str",
}


def object_type_name(obj) -> str:
    """Display type of one abstract object."""
    if isinstance(obj, DataObject):
        return obj.class_name
    if isinstance(obj, MetaClsObject):
        return "type"
    if isinstance(obj, MetaFuncObject):
        return "function"
    if isinstance(obj, ConstObject):
        name = obj.type_name
        return "None" if name in ("NoneType", "builtins.NoneType") else name
    return "object"


def infer_types(
    graph: PointsToGraph,
    table: FunctionTable,
    global_env: "GlobalEnv | None" = None,
    exclude_modules: Iterable[str] = (),
) -> KeyedTypeResult:
    """Union of object types per named variable reachable by the solver.

    Temporaries carry no source name and are excluded. Module-scope keys
    come from the global environment when one is supplied.
    """
    excluded = set(exclude_modules)
    result: KeyedTypeResult = {}

    for func, translated in table.items():
        if func.module in excluded:
            continue
        for name, var in translated.env.bindings.items():
            if var.is_temp:
                continue
            key = Key(func.module, func.scope_name, name)
            types = {object_type_name(o) for o in graph.points_to(var)}
            result.setdefault(key, set()).update(types)

    if global_env is not None:
        for qualified, var in global_env.bindings.items():
            if var.owner in excluded:
                continue
            key = Key(var.owner, MODULE_SCOPE, var.display_name)
            types = {object_type_name(o) for o in graph.points_to(var)}
            result.setdefault(key, set()).update(types)

    return result


def shallow_scan(
    units: Iterable["ModuleUnit"], include_tests: bool = False
) -> KeyedTypeResult:
    """Syntactic pass over builtin constructor calls, literals, annotations.

    Covers code the solver never reaches: a key is created for every hit
    even if nothing else is known about the enclosing function.
    """
    result: KeyedTypeResult = {}
    for unit in units:
        if unit.is_test and not include_tests:
            continue
        _scan_body(unit.tree.body, unit.module_name, MODULE_SCOPE, result)
    return result


def _scan_body(body, module: str, scope: str, result: KeyedTypeResult) -> None:
    for stmt in body:
        if isinstance(stmt, ast.Assign):
            inferred = _builtin_type_of(stmt.value)
            if inferred is not None:
                for target in stmt.targets:
                    if isinstance(target, ast.Name):
                        _add(result, module, scope, target.id, inferred)
        elif isinstance(stmt, ast.AnnAssign):
            if isinstance(stmt.target, ast.Name):
                annotated = _annotation_name(stmt.annotation)
                if annotated is not None:
                    _add(result, module, scope, stmt.target.id, annotated)
                elif stmt.value is not None:
                    inferred = _builtin_type_of(stmt.value)
                    if inferred is not None:
                        _add(result, module, scope, stmt.target.id, inferred)
        elif isinstance(stmt, (ast.FunctionDef, ast.AsyncFunctionDef)):
            child = f"{scope}.{stmt.name}" if scope != MODULE_SCOPE else stmt.name
            for arg in _annotated_args(stmt.args):
                annotated = _annotation_name(arg.annotation)
                if annotated is not None:
                    _add(result, module, child, arg.arg, annotated)
            if stmt.returns is not None:
                annotated = _annotation_name(stmt.returns)
                if annotated is not None:
                    _add(result, module, child, f"{stmt.name}_ret", annotated)
            _scan_body(stmt.body, module, child, result)
        elif isinstance(stmt, ast.ClassDef):
            child = f"{scope}.{stmt.name}" if scope != MODULE_SCOPE else stmt.name
            _scan_body(stmt.body, module, child, result)
        elif isinstance(stmt, (ast.For, ast.AsyncFor, ast.While, ast.If)):
            _scan_body(stmt.body, module, scope, result)
            _scan_body(stmt.orelse, module, scope, result)
        elif isinstance(stmt, (ast.With, ast.AsyncWith)):
            _scan_body(stmt.body, module, scope, result)
        elif isinstance(stmt, ast.Try):
            _scan_body(stmt.body, module, scope, result)
            for handler in stmt.handlers:
                _scan_body(handler.body, module, scope, result)
            _scan_body(stmt.orelse, module, scope, result)
            _scan_body(stmt.finalbody, module, scope, result)


def _add(result: KeyedTypeResult, module: str, scope: str, name: str, type_name: str) -> None:
    result.setdefault(Key(module, scope, name), set()).add(type_name)


def _annotated_args(args: ast.arguments) -> list[ast.arg]:
    out = list(args.posonlyargs) + list(args.args) + list(args.kwonlyargs)
    if args.vararg:
        out.append(args.vararg)
    if args.kwarg:
        out.append(args.kwarg)
    return [a for a in out if a.annotation is not None]


def _builtin_type_of(value: ast.expr) -> str | None:
    if isinstance(value, ast.Constant):
        if value.value is None:
            return "None"
        if value.value is Ellipsis:
            return None
        if isinstance(value.value, bool):
            return "bool"
        if isinstance(value.value, (int, float, complex, str, bytes)):
            return type(value.value).__name__
        return None
    for node_type, name in _LITERAL_NODE_TYPES.items():
        if isinstance(value, node_type):
            return name
    if (
        isinstance(value, ast.Call)
        and isinstance(value.func, ast.Name)
        and value.func.id in BUILTIN_CONSTRUCTORS
    ):
        return value.func.id
    return None


def _annotation_name(annotation: ast.expr | None) -> str | None:
    """Top-level name of an annotation; parametric arguments are dropped."""
    if annotation is None:
        return None
    if isinstance(annotation, ast.Constant) and isinstance(annotation.value, str):
        try:
            parsed = ast.parse(annotation.value, mode="eval").body
        except SyntaxError:
            return None
        return _annotation_name(parsed)
    if isinstance(annotation, ast.Subscript):
        return _annotation_name(annotation.value)
    if isinstance(annotation, ast.Name):
        return "None" if annotation.id == "NoneType" else annotation.id
    if isinstance(annotation, ast.Attribute):
        parts = []
        current: ast.expr = annotation
        while isinstance(current, ast.Attribute):
            parts.append(current.attr)
            current = current.value
        if isinstance(current, ast.Name):
            parts.append(current.id)
            return ".".join(parts[::-1])
    if isinstance(annotation, ast.Constant) and annotation.value is None:
        return "None"
    return None


def merge(primary: KeyedTypeResult, shallow: KeyedTypeResult) -> KeyedTypeResult:
    """Pointwise union; shallow entries create keys missing from primary."""
    out: KeyedTypeResult = {key: set(types) for key, types in primary.items()}
    for key, types in shallow.items():
        out.setdefault(key, set()).update(types)
    return out
