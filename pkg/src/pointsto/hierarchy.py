"""Class hierarchy, C3 linearization, and method resolution.

Only module-level classes participate. Bases that cannot be resolved to a
package class (external library classes, computed bases) are recorded and
ignored for linearization; a synthetic root terminates every linearization
so lookups bottom out without modeling builtins.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable

from .objects import MetaClsObject, PointsToGraph
from .tac import FunctionInfo, function_info_for_def

if TYPE_CHECKING:
    from .diagnostics import Diagnostics
    from .frontend import GlobalEnv, ModuleImports, ModuleUnit


class InconsistentHierarchyError(Exception):
    """Raised when the C3 merge has no consistent linearization."""


@dataclass(eq=False)
class ClassRecord:
    qualname: str  # "m.C"
    module: str
    name: str
    node: ast.ClassDef | None = None
    bases: list["ClassRecord"] = field(default_factory=list)
    unresolved_bases: list[str] = field(default_factory=list)
    members: dict[str, FunctionInfo] = field(default_factory=dict)

    def __repr__(self) -> str:
        return f"<class {self.qualname}>"


ROOT_CLASS = ClassRecord(qualname="<root>", module="", name="<root>")


def c3_linearize(record: ClassRecord) -> list[ClassRecord]:
    """Standard C3 merge over the resolvable bases, ending at the root."""
    return _linearize(record, frozenset())


def _linearize(record: ClassRecord, visiting: frozenset) -> list[ClassRecord]:
    if record is ROOT_CLASS:
        return [ROOT_CLASS]
    if record in visiting:
        raise InconsistentHierarchyError(f"inheritance cycle at {record.qualname}")
    bases = record.bases if record.bases else [ROOT_CLASS]
    sequences = [_linearize(base, visiting | {record}) for base in bases]
    sequences.append(list(bases))
    return [record] + _c3_merge(sequences, record)


def _c3_merge(sequences: list[list[ClassRecord]], record: ClassRecord) -> list[ClassRecord]:
    result: list[ClassRecord] = []
    sequences = [list(seq) for seq in sequences]
    while True:
        sequences = [seq for seq in sequences if seq]
        if not sequences:
            return result
        for seq in sequences:
            candidate = seq[0]
            if not any(candidate in other[1:] for other in sequences):
                break
        else:
            raise InconsistentHierarchyError(
                f"no consistent linearization for {record.qualname}"
            )
        result.append(candidate)
        for seq in sequences:
            if seq and seq[0] is candidate:
                del seq[0]


class Hierarchy:
    """Linearizations plus the (class, method name) resolution cache."""

    def __init__(self) -> None:
        self.records: dict[str, ClassRecord] = {}
        self.linearization: dict[ClassRecord, list[ClassRecord]] = {}
        self._excluded: set[ClassRecord] = set()
        self._lookup_cache: dict[tuple[ClassRecord, str], FunctionInfo | None] = {}

    def add(self, record: ClassRecord) -> None:
        self.records[record.qualname] = record

    def linearize_all(self, diagnostics: "Diagnostics | None" = None) -> None:
        for record in self.records.values():
            try:
                self.linearization[record] = c3_linearize(record)
            except InconsistentHierarchyError as exc:
                self._excluded.add(record)
                if diagnostics is not None:
                    path = record.node and getattr(record.node, "lineno", 0)
                    diagnostics.report(record.module, path or 0, str(exc))

    def lookup(self, record: ClassRecord, name: str) -> FunctionInfo | None:
        """First definition of ``name`` along the linearization, if any."""
        key = (record, name)
        if key in self._lookup_cache:
            return self._lookup_cache[key]
        result: FunctionInfo | None = None
        if record not in self._excluded:
            for cls in self.linearization.get(record, ()):
                if name in cls.members:
                    result = cls.members[name]
                    break
        self._lookup_cache[key] = result
        return result


def mro_lookup(hierarchy: Hierarchy, record: ClassRecord, name: str) -> FunctionInfo | None:
    return hierarchy.lookup(record, name)


def build_hierarchy(
    units: Iterable["ModuleUnit"],
    module_imports: dict[str, "ModuleImports"],
    diagnostics: "Diagnostics | None" = None,
) -> Hierarchy:
    """Collect module-level classes, resolve bases, compute linearizations."""
    units = list(units)
    hierarchy = Hierarchy()
    base_exprs: dict[ClassRecord, list[ast.expr]] = {}

    for unit in units:
        for stmt in unit.tree.body:
            if not isinstance(stmt, ast.ClassDef):
                continue
            record = ClassRecord(
                qualname=f"{unit.module_name}.{stmt.name}",
                module=unit.module_name,
                name=stmt.name,
                node=stmt,
            )
            for member in stmt.body:
                if isinstance(member, (ast.FunctionDef, ast.AsyncFunctionDef)):
                    record.members[member.name] = function_info_for_def(
                        unit.module_name, stmt.name, member, str(unit.source_path)
                    )
            hierarchy.add(record)
            base_exprs[record] = list(stmt.bases)

    module_names = {u.module_name for u in units}
    for record, exprs in base_exprs.items():
        minfo = module_imports.get(record.module)
        for expr in exprs:
            resolved = _resolve_base(expr, record.module, minfo, module_names, hierarchy)
            if resolved is not None:
                record.bases.append(resolved)
            else:
                text = ast.unparse(expr) if isinstance(expr, ast.expr) else repr(expr)
                record.unresolved_bases.append(text)

    hierarchy.linearize_all(diagnostics)
    return hierarchy


def _resolve_base(
    expr: ast.expr,
    module: str,
    minfo: "ModuleImports | None",
    module_names: set[str],
    hierarchy: Hierarchy,
) -> ClassRecord | None:
    parts: list[str] | None
    if isinstance(expr, ast.Name):
        parts = [expr.id]
    else:
        parts = _dotted(expr)
    if not parts:
        return None

    candidates = []
    if len(parts) == 1:
        candidates.append(f"{module}.{parts[0]}")
    alias = minfo.alias_path.get(parts[0]) if minfo else None
    expanded = (alias.split(".") if alias else [parts[0]]) + parts[1:]
    candidates.append(".".join(expanded))
    if len(parts) > 1:
        candidates.append(".".join(parts))
    for candidate in candidates:
        record = hierarchy.records.get(candidate)
        if record is not None:
            return record
    return None


def _dotted(node: ast.expr) -> list[str] | None:
    parts: list[str] = []
    current = node
    while isinstance(current, ast.Attribute):
        parts.append(current.attr)
        current = current.value
    if isinstance(current, ast.Name):
        parts.append(current.id)
        return parts[::-1]
    return None


def seed_metaclass_objects(
    hierarchy: Hierarchy,
    global_env: "GlobalEnv",
    graph: PointsToGraph,
    diagnostics: "Diagnostics | None" = None,
) -> None:
    """Point each module-level class binding at its class object."""
    for record in hierarchy.records.values():
        var = global_env.lookup(record.qualname)
        if var is None:
            if diagnostics is not None:
                diagnostics.report(record.module, 0, f"unbound class {record.qualname}")
            continue
        graph.add(var, MetaClsObject(record))
