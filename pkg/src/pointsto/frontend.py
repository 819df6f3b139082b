"""Package discovery, import classification, and global environment setup.

Module names are derived from the path relative to the analysis root, with
separators replaced by dots; ``__init__`` segments are dropped. Files that
do not parse are skipped with a diagnostic so a whole-package analysis
survives stray sources.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .diagnostics import Diagnostics
from .tac import (
    AnalysisVariable,
    FunctionInfo,
    VariableAllocator,
    function_info_for_def,
)

DEFAULT_TEST_DIRS = ("test", "tests")


@dataclass
class ModuleUnit:
    module_name: str
    source_path: Path
    tree: ast.Module
    is_test: bool = False


@dataclass
class ImportRecord:
    """One bound name introduced by one import statement."""

    importing_module: str
    target: str  # imported dotted path, e.g. "re" or "pkg.metrics.get_scorer"
    bound_name: str
    kind: str  # "internal" | "external"
    is_from: bool = False
    lineno: int = 0
    # Dotted path the bound name denotes: the target for from-imports and
    # aliased imports, the top-level package for plain `import x.y`.
    denoted_path: str = ""
    node: object = field(default=None, repr=False, compare=False)

    @property
    def statement_text(self) -> str:
        """The single-alias import statement realizing this record."""
        if self.is_from:
            module, _, name = self.target.rpartition(".")
            alias = f" as {self.bound_name}" if self.bound_name != name else ""
            return f"from {module} import {name}{alias}"
        default_binding = self.target.split(".")[0]
        alias = f" as {self.bound_name}" if self.bound_name != default_binding else ""
        return f"import {self.target}{alias}"


@dataclass
class ModuleImports:
    """Per-module view over the import records, consumed by translation."""

    module: str
    source_path: str
    external_imports: tuple[str, ...] = ()
    # What dotted path each imported name denotes, e.g. {"q": "pkg.metrics"}.
    alias_path: dict[str, str] = field(default_factory=dict)
    records_by_node: dict[int, tuple[ImportRecord, ...]] = field(default_factory=dict)


class GlobalEnv:
    """Bindings of qualified module-level identifiers to analysis variables.

    Every module-level class, function, and assigned identifier (imports
    included, as implicit assignments) is bound exactly once, before any
    function body is translated.
    """

    def __init__(self) -> None:
        self.bindings: dict[str, AnalysisVariable] = {}
        self._external_aliases: set[str] = set()

    def lookup(self, key: str) -> AnalysisVariable | None:
        return self.bindings.get(key)

    def bind(self, key: str, var: AnalysisVariable) -> None:
        self.bindings[key] = var

    def mark_external_alias(self, key: str) -> None:
        self._external_aliases.add(key)

    def unmark_external_alias(self, key: str) -> None:
        self._external_aliases.discard(key)

    def is_external_alias(self, key: str) -> bool:
        return key in self._external_aliases

    def __len__(self) -> int:
        return len(self.bindings)


def parse_package(
    root: Path | str,
    tests_dirs: Sequence[str] = DEFAULT_TEST_DIRS,
    diagnostics: Diagnostics | None = None,
) -> list[ModuleUnit]:
    """Parse every source file under ``root`` into a ModuleUnit.

    Unparseable files are skipped and reported; a missing root is a fatal
    configuration error.
    """
    root = Path(root)
    if not root.exists():
        raise FileNotFoundError(f"analysis root does not exist: {root}")
    test_segments = {d.lower() for d in tests_dirs}
    units: list[ModuleUnit] = []
    for path in sorted(root.rglob("*.py")):
        relative = path.relative_to(root)
        try:
            source = path.read_text(encoding="utf-8")
            tree = ast.parse(source, filename=str(path))
        except (SyntaxError, UnicodeDecodeError, OSError) as exc:
            line = getattr(exc, "lineno", 0) or 0
            if diagnostics is not None:
                diagnostics.report(str(path), line, f"skipped: {exc.__class__.__name__}: {exc}")
            continue
        units.append(
            ModuleUnit(
                module_name=_module_name(root, relative),
                source_path=path,
                tree=tree,
                is_test=any(seg.lower() in test_segments for seg in relative.parts[:-1]),
            )
        )
    return units


def _module_name(root: Path, relative: Path) -> str:
    parts = list(relative.with_suffix("").parts)
    if parts and parts[-1] == "__init__":
        parts = parts[:-1]
    if not parts:
        return root.name
    return ".".join(parts)


def classify_imports(
    units: Iterable[ModuleUnit], diagnostics: Diagnostics | None = None
) -> list[ImportRecord]:
    """One record per bound name of every import statement.

    Internal imports are relative imports and imports resolving into the
    package under analysis; everything else is external and collectively
    forms the module's evaluation environment.
    """
    units = list(units)
    module_names = {u.module_name for u in units}
    records: list[ImportRecord] = []
    for unit in units:
        for node in ast.walk(unit.tree):
            if isinstance(node, ast.Import):
                for alias in node.names:
                    records.append(
                        ImportRecord(
                            importing_module=unit.module_name,
                            target=alias.name,
                            bound_name=alias.asname or alias.name.split(".")[0],
                            kind=_classify(alias.name, relative=False, names=module_names),
                            is_from=False,
                            lineno=node.lineno,
                            denoted_path=alias.name if alias.asname else alias.name.split(".")[0],
                            node=node,
                        )
                    )
            elif isinstance(node, ast.ImportFrom):
                base = _resolve_from_base(unit.module_name, node)
                for alias in node.names:
                    if alias.name == "*":
                        if diagnostics is not None:
                            diagnostics.report(
                                str(unit.source_path),
                                node.lineno,
                                f"star import from {base or '?'} not interpreted",
                            )
                        continue
                    target = f"{base}.{alias.name}" if base else alias.name
                    records.append(
                        ImportRecord(
                            importing_module=unit.module_name,
                            target=target,
                            bound_name=alias.asname or alias.name,
                            kind=_classify(target, node.level > 0, module_names),
                            is_from=True,
                            lineno=node.lineno,
                            denoted_path=target,
                            node=node,
                        )
                    )
    return records


def _classify(target: str, relative: bool, names: set[str]) -> str:
    if relative:
        return "internal"
    parts = target.split(".")
    for length in range(len(parts), 0, -1):
        if ".".join(parts[:length]) in names:
            return "internal"
    return "external"


def _resolve_from_base(module: str, node: ast.ImportFrom) -> str:
    """Absolute dotted base of a from-import, resolving relative levels."""
    if node.level == 0:
        return node.module or ""
    parts = module.split(".")
    # One level strips the module's own name, each further level one package.
    if len(parts) >= node.level:
        base_parts = parts[: len(parts) - node.level]
    else:
        base_parts = []
    if node.module:
        base_parts = base_parts + node.module.split(".")
    return ".".join(base_parts)


def build_module_imports(
    units: Iterable[ModuleUnit], records: Iterable[ImportRecord]
) -> dict[str, ModuleImports]:
    """Group records per module and precompute alias and evaluation views."""
    out = {
        u.module_name: ModuleImports(u.module_name, str(u.source_path)) for u in units
    }
    by_node: dict[str, dict[int, list[ImportRecord]]] = {}
    for record in records:
        minfo = out.get(record.importing_module)
        if minfo is None:
            continue
        if record.kind == "external":
            text = record.statement_text
            if text not in minfo.external_imports:
                minfo.external_imports = minfo.external_imports + (text,)
        minfo.alias_path[record.bound_name] = record.denoted_path or record.target
        by_node.setdefault(record.importing_module, {}).setdefault(
            id(record.node), []
        ).append(record)
    for module, groups in by_node.items():
        out[module].records_by_node = {k: tuple(v) for k, v in groups.items()}
    return out


def init_global_env(
    units: Iterable[ModuleUnit],
    allocator: VariableAllocator | None = None,
    diagnostics: Diagnostics | None = None,
) -> GlobalEnv:
    """Bind every module-level definition to a fresh analysis variable.

    Bodies are not interpreted here; that happens on demand during
    constraint solving. A collision between an import alias and another
    module-level definition keeps the first binding and is reported.
    """
    allocator = allocator or VariableAllocator()
    env = GlobalEnv()
    bound_kinds: dict[str, set[str]] = {}
    units = list(units)
    module_names = {u.module_name for u in units}

    def bind(unit: ModuleUnit, name: str, kind: str, line: int) -> None:
        key = f"{unit.module_name}.{name}"
        kinds = bound_kinds.setdefault(key, set())
        if key in env.bindings:
            if kind not in kinds and diagnostics is not None:
                diagnostics.report(
                    str(unit.source_path), line, f"name collision for {key} ({kind})"
                )
            kinds.add(kind)
            if kind != "external-import":
                env.unmark_external_alias(key)
            return
        kinds.add(kind)
        env.bind(key, allocator.fresh(unit.module_name, name))
        if kind == "external-import":
            env.mark_external_alias(key)

    for unit in units:
        for stmt in unit.tree.body:
            for name, kind, line in _module_level_bindings(stmt, unit, module_names):
                bind(unit, name, kind, line)
    return env


def _module_level_bindings(
    stmt: ast.stmt, unit: ModuleUnit, module_names: set[str]
) -> list[tuple[str, str, int]]:
    line = getattr(stmt, "lineno", 0)
    if isinstance(stmt, ast.ClassDef):
        return [(stmt.name, "class", line)]
    if isinstance(stmt, (ast.FunctionDef, ast.AsyncFunctionDef)):
        return [(stmt.name, "def", line)]
    if isinstance(stmt, ast.Assign):
        return [(n, "assign", line) for t in stmt.targets for n in _target_names(t)]
    if isinstance(stmt, (ast.AnnAssign, ast.AugAssign)):
        return [(n, "assign", line) for n in _target_names(stmt.target)]
    if isinstance(stmt, (ast.For, ast.AsyncFor)):
        names = [(n, "assign", line) for n in _target_names(stmt.target)]
        for inner in stmt.body + stmt.orelse:
            names.extend(_module_level_bindings(inner, unit, module_names))
        return names
    if isinstance(stmt, (ast.With, ast.AsyncWith)):
        names = [
            (n, "assign", line)
            for item in stmt.items
            if item.optional_vars is not None
            for n in _target_names(item.optional_vars)
        ]
        for inner in stmt.body:
            names.extend(_module_level_bindings(inner, unit, module_names))
        return names
    if isinstance(stmt, (ast.If, ast.While)):
        names: list[tuple[str, str, int]] = []
        for inner in stmt.body + stmt.orelse:
            names.extend(_module_level_bindings(inner, unit, module_names))
        return names
    if isinstance(stmt, ast.Try):
        names = []
        for inner in stmt.body + stmt.orelse + stmt.finalbody:
            names.extend(_module_level_bindings(inner, unit, module_names))
        for handler in stmt.handlers:
            for inner in handler.body:
                names.extend(_module_level_bindings(inner, unit, module_names))
        return names
    if isinstance(stmt, ast.Import):
        return [
            (alias.asname or alias.name.split(".")[0], _import_kind(alias.name, False, module_names), line)
            for alias in stmt.names
        ]
    if isinstance(stmt, ast.ImportFrom):
        out = []
        for alias in stmt.names:
            if alias.name == "*":
                continue
            base = _resolve_from_base(unit.module_name, stmt)
            target = f"{base}.{alias.name}" if base else alias.name
            kind = _import_kind(target, stmt.level > 0, module_names)
            out.append((alias.asname or alias.name, kind, line))
        return out
    return []


def _import_kind(target: str, relative: bool, module_names: set[str]) -> str:
    return (
        "internal-import"
        if _classify(target, relative, module_names) == "internal"
        else "external-import"
    )


def _target_names(target: ast.expr) -> list[str]:
    if isinstance(target, ast.Name):
        return [target.id]
    if isinstance(target, ast.Starred):
        return _target_names(target.value)
    if isinstance(target, (ast.Tuple, ast.List)):
        out: list[str] = []
        for elt in target.elts:
            out.extend(_target_names(elt))
        return out
    return []


def discover_entry_points(
    units: Iterable[ModuleUnit],
    extra: Sequence[str] = (),
    diagnostics: Diagnostics | None = None,
) -> list[FunctionInfo]:
    """Test-directory functions plus explicitly named entries, sorted."""
    units = list(units)
    found: dict[tuple[str, str, int], FunctionInfo] = {}

    def add(info: FunctionInfo) -> None:
        found[(info.module, info.scope_name, info.lineno)] = info

    all_defs: list[FunctionInfo] = []
    for unit in units:
        for stmt in unit.tree.body:
            if isinstance(stmt, (ast.FunctionDef, ast.AsyncFunctionDef)):
                info = function_info_for_def(
                    unit.module_name, "", stmt, str(unit.source_path)
                )
                all_defs.append(info)
                if unit.is_test:
                    add(info)
            elif isinstance(stmt, ast.ClassDef):
                for member in stmt.body:
                    if isinstance(member, (ast.FunctionDef, ast.AsyncFunctionDef)):
                        info = function_info_for_def(
                            unit.module_name,
                            stmt.name,
                            member,
                            str(unit.source_path),
                        )
                        all_defs.append(info)
                        if unit.is_test:
                            add(info)

    for name in extra:
        matches = [
            info
            for info in all_defs
            if info.qualname == name
            or info.name == name
            or info.qualname.endswith(f".{name}")
        ]
        if not matches and diagnostics is not None:
            diagnostics.report("<entry>", 0, f"entry point {name!r} not found")
        for info in matches:
            add(info)

    entries = sorted(found.values(), key=lambda f: (f.module, f.scope_name, f.lineno))
    if not entries and diagnostics is not None:
        diagnostics.report("<entry>", 0, "no entry points discovered")
    return entries
