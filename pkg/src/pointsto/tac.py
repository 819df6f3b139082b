"""Translation of function bodies into a five-statement 3-address IR.

Every statement of the IR is one of: new assignment, copy, field write,
field read, or call. Field name ``[]`` stands for subscript access.
Translation is flow-insensitive: one analysis variable per source local per
function, statement order irrelevant to the solver.

Translation is hybrid. Identifier and attribute expressions ("simple") are
resolved in the local environment, then the global environment, and only
then handed to the concrete evaluator. Every other expression ("complex")
is first offered to the evaluator against the module's external imports;
on failure the structural rules below apply, and constructs outside the
interpreted subset fall through to a recursive descent that keeps value
flow of sub-expressions without gluing them together.
"""

from __future__ import annotations

import ast
import itertools
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Optional, Sequence, Union

from .objects import (
    SUBSCRIPT_FIELD,
    AbstractObject,
    ConstObject,
    DataObject,
    MetaFuncObject,
)

if TYPE_CHECKING:
    from .concrete import Evaluator
    from .diagnostics import Diagnostics
    from .frontend import GlobalEnv, ModuleImports

MODULE_SCOPE = "<module>"


@dataclass(eq=False)
class AnalysisVariable:
    """A node of the points-to graph: local, parameter, return slot, or temp."""

    id: int
    display_name: str
    owner: str  # qualified name of the enclosing function or module
    is_temp: bool = False

    def __repr__(self) -> str:
        return f"<var {self.id} {self.owner}:{self.display_name}>"


class VariableAllocator:
    """Globally unique, monotonically increasing variable ids."""

    def __init__(self) -> None:
        self._next_id = 0

    def fresh(self, owner: str, display_name: str | None = None) -> AnalysisVariable:
        vid = self._next_id
        self._next_id += 1
        if display_name is None:
            return AnalysisVariable(vid, f"t{vid}", owner, is_temp=True)
        return AnalysisVariable(vid, display_name, owner)


@dataclass(frozen=True)
class FunctionInfo:
    """Identity of one function definition (or module initializer)."""

    module: str
    scope_name: str  # name within the module, e.g. "validate", "C.f", "<module>"
    name: str
    lineno: int
    is_module_init: bool = False
    node: object = field(default=None, compare=False, repr=False)
    source_path: str = field(default="", compare=False)

    @property
    def qualname(self) -> str:
        return f"{self.module}.{self.scope_name}"


def function_info_for_def(
    module: str, scope_prefix: str, node: ast.AST, source_path: str = ""
) -> FunctionInfo:
    """Identity for a def; the same inputs always yield an equal identity."""
    name = node.name  # type: ignore[attr-defined]
    scope = f"{scope_prefix}.{name}" if scope_prefix else name
    return FunctionInfo(
        module=module,
        scope_name=scope,
        name=name,
        lineno=node.lineno,
        node=node,
        source_path=source_path,
    )


def module_init_info(module: str, tree: ast.Module, source_path: str = "") -> FunctionInfo:
    return FunctionInfo(
        module=module,
        scope_name=MODULE_SCOPE,
        name=MODULE_SCOPE,
        lineno=0,
        is_module_init=True,
        node=tree,
        source_path=source_path,
    )


# ---------------------------------------------------------------------------
# Statements


@dataclass(eq=False)
class New:
    lhs: AnalysisVariable
    obj: AbstractObject
    func: FunctionInfo


@dataclass(eq=False)
class Copy:
    lhs: AnalysisVariable
    rhs: AnalysisVariable
    func: FunctionInfo


@dataclass(eq=False)
class FieldWrite:
    base: AnalysisVariable
    field: str
    rhs: AnalysisVariable
    func: FunctionInfo


@dataclass(eq=False)
class FieldRead:
    lhs: AnalysisVariable
    base: AnalysisVariable
    field: str
    func: FunctionInfo


@dataclass(eq=False)
class Call:
    lhs: AnalysisVariable
    callee: AnalysisVariable
    args: tuple[AnalysisVariable, ...]
    func: FunctionInfo
    site: str = ""


TacStatement = Union[New, Copy, FieldWrite, FieldRead, Call]


def format_statement(stmt: TacStatement) -> str:
    """Debug dump form: one statement per line, source-style."""
    if isinstance(stmt, New):
        return f"{stmt.lhs.display_name} = {stmt.obj!r}"
    if isinstance(stmt, Copy):
        return f"{stmt.lhs.display_name} = {stmt.rhs.display_name}"
    if isinstance(stmt, FieldWrite):
        return f"{stmt.base.display_name}.{stmt.field} = {stmt.rhs.display_name}"
    if isinstance(stmt, FieldRead):
        return f"{stmt.lhs.display_name} = {stmt.base.display_name}.{stmt.field}"
    args = ", ".join(a.display_name for a in stmt.args)
    return f"{stmt.lhs.display_name} = {stmt.callee.display_name}({args})"


def dump_statements(func: FunctionInfo, statements: Iterable[TacStatement]) -> str:
    return "\n".join(f"{func.qualname}: {format_statement(s)}" for s in statements)


def alpha_signature(statements: Sequence[TacStatement]) -> tuple:
    """Statement list up to renaming of variables, for golden comparisons.

    Variables are numbered by first occurrence; objects are reduced to their
    descriptor. Two translations of the same source compare equal.
    """
    numbering: dict[int, int] = {}

    def var(v: AnalysisVariable) -> int:
        return numbering.setdefault(v.id, len(numbering))

    def obj(o: AbstractObject) -> tuple:
        if isinstance(o, DataObject):
            return ("data", o.class_name)
        if isinstance(o, MetaFuncObject):
            return ("meta-func", o.func.qualname)
        if isinstance(o, ConstObject):
            return ("const", o.type_name)
        return ("meta-cls", o.cls.qualname)

    out = []
    for s in statements:
        if isinstance(s, New):
            out.append(("new", var(s.lhs), obj(s.obj)))
        elif isinstance(s, Copy):
            out.append(("copy", var(s.lhs), var(s.rhs)))
        elif isinstance(s, FieldWrite):
            out.append(("write", var(s.base), s.field, var(s.rhs)))
        elif isinstance(s, FieldRead):
            out.append(("read", var(s.lhs), var(s.base), s.field))
        else:
            out.append(("call", var(s.lhs), var(s.callee), tuple(var(a) for a in s.args)))
    return tuple(out)


# ---------------------------------------------------------------------------
# Environments


class LocalEnv:
    """Local reference environment of one function under translation.

    Holds the (identifier, variable) bindings, a reference to the global
    environment, and the module's external imports used by the evaluator.
    A lookup returns the most recent binding; rebinding an identifier
    replaces the previous binding, so no two live bindings share a name.
    """

    def __init__(
        self,
        global_env: "GlobalEnv | None" = None,
        external_imports: tuple[str, ...] = (),
    ) -> None:
        self.bindings: dict[str, AnalysisVariable] = {}
        self.global_env = global_env
        self.external_imports = external_imports
        self.params: list[AnalysisVariable] = []
        self.ret_var: AnalysisVariable | None = None

    def lookup(self, name: str) -> Optional[AnalysisVariable]:
        return self.bindings.get(name)

    def bind(self, name: str, var: AnalysisVariable) -> None:
        self.bindings[name] = var

    def items(self) -> list[tuple[str, AnalysisVariable]]:
        return list(self.bindings.items())


@dataclass
class TranslatedFunction:
    func: FunctionInfo
    env: LocalEnv
    statements: list[TacStatement]


# Maps a function identity to its translation; filled on demand, and an
# entry exists before the solver processes any statement of the function.
FunctionTable = dict[FunctionInfo, TranslatedFunction]


_LITERAL_CLASSES = {
    ast.List: "list",
    ast.Tuple: "tuple",
    ast.Set: "set",
    ast.Dict: "dict",
}

_COMPREHENSION_CLASSES = {
    ast.ListComp: "list",
    ast.SetComp: "set",
    ast.DictComp: "dict",
}


class Translator:
    """Interprets one function body (or module initializer) at a time."""

    def __init__(
        self,
        global_env: "GlobalEnv",
        module_imports: dict[str, "ModuleImports"],
        module_names: set[str],
        evaluator: "Evaluator",
        allocator: VariableAllocator | None = None,
        diagnostics: "Diagnostics | None" = None,
    ) -> None:
        self.global_env = global_env
        self.module_imports = module_imports
        self.module_names = module_names
        self.evaluator = evaluator
        self.allocator = allocator or VariableAllocator()
        self.diagnostics = diagnostics

    # -- entry points -------------------------------------------------

    def translate_function(
        self,
        func: FunctionInfo,
        initial_bindings: Sequence[tuple[str, AnalysisVariable]] | None = None,
    ) -> TranslatedFunction:
        env = LocalEnv(
            global_env=self.global_env,
            external_imports=self._external_imports(func.module),
        )
        statements: list[TacStatement] = []

        if func.is_module_init:
            for stmt in func.node.body:  # type: ignore[attr-defined]
                env, out = self.translate_statement(stmt, env, func)
                statements.extend(out)
            return TranslatedFunction(func, env, statements)

        node = func.node
        if initial_bindings is None:
            initial_bindings = [
                (arg.arg, self.allocator.fresh(func.qualname, arg.arg))
                for arg in _all_parameters(node.args)  # type: ignore[attr-defined]
            ]
        for name, var in initial_bindings:
            env.bind(name, var)
        env.params = [
            env.lookup(arg.arg)
            for arg in _positional_parameters(node.args)  # type: ignore[attr-defined]
            if env.lookup(arg.arg) is not None
        ]
        ret = self.allocator.fresh(func.qualname, f"{func.name}_ret")
        env.bind(f"{func.name}_ret", ret)
        env.ret_var = ret

        for stmt in node.body:  # type: ignore[attr-defined]
            env, out = self.translate_statement(stmt, env, func)
            statements.extend(out)
        return TranslatedFunction(func, env, statements)

    # -- statements ---------------------------------------------------

    def translate_statement(
        self, node: ast.stmt, env: LocalEnv, func: FunctionInfo
    ) -> tuple[LocalEnv, list[TacStatement]]:
        if isinstance(node, (ast.Pass, ast.Break, ast.Continue, ast.Global, ast.Nonlocal)):
            return env, []

        if isinstance(node, (ast.Import, ast.ImportFrom)):
            if func.is_module_init:
                return env, self.translate_import(node, env, func)
            return env, []

        if isinstance(node, ast.Assign):
            value_vars, out = self.translate_expression(node.value, env, func)
            for target in node.targets:
                out = self._assign_to_target(target, value_vars, out, env, func)
            return env, out

        if isinstance(node, ast.AnnAssign):
            if node.value is None:
                if isinstance(node.target, ast.Name):
                    self._bind_assigned_name(node.target.id, env, func)
                return env, []
            value_vars, out = self.translate_expression(node.value, env, func)
            out = self._assign_to_target(node.target, value_vars, out, env, func)
            return env, out

        if isinstance(node, ast.AugAssign):
            # x += e keeps the value flow of both sides, operator dropped.
            synthetic = ast.BinOp(
                left=_as_load(node.target), op=node.op, right=node.value
            )
            ast.copy_location(synthetic, node)
            value_vars, out = self.translate_expression(synthetic, env, func)
            out = self._assign_to_target(node.target, value_vars, out, env, func)
            return env, out

        if isinstance(node, ast.Expr):
            _, out = self.translate_expression(node.value, env, func)
            return env, out

        if isinstance(node, ast.Return):
            if node.value is None or env.ret_var is None:
                return env, []
            value_vars, out = self.translate_expression(node.value, env, func)
            return env, self._emit_assignment(env.ret_var, value_vars, out, func)

        if isinstance(node, (ast.For, ast.AsyncFor)):
            # for x in e: s  reduces to  x = e; s
            value_vars, out = self.translate_expression(node.iter, env, func)
            out = self._assign_to_target(node.target, value_vars, out, env, func)
            for stmt in itertools.chain(node.body, node.orelse):
                env, more = self.translate_statement(stmt, env, func)
                out.extend(more)
            return env, out

        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
            return env, self._translate_def(node, env, func)

        if isinstance(node, ast.ClassDef):
            # Module-level classes are handled by hierarchy analysis;
            # nested classes are outside the interpreted subset.
            return env, []

        return self._translate_other_statement(node, env, func)

    def _translate_def(
        self, node: ast.FunctionDef | ast.AsyncFunctionDef, env: LocalEnv, func: FunctionInfo
    ) -> list[TacStatement]:
        out: list[TacStatement] = []
        for dec in node.decorator_list:
            _, stmts = self.translate_expression(dec, env, func)
            out.extend(stmts)
        if func.is_module_init:
            target = self._bind_assigned_name(node.name, env, func)
            scope_prefix = ""
        else:
            target = env.lookup(node.name)
            if target is None:
                target = self.allocator.fresh(func.qualname, node.name)
                env.bind(node.name, target)
            scope_prefix = func.scope_name
        info = function_info_for_def(func.module, scope_prefix, node, func.source_path)
        out.append(New(target, MetaFuncObject(info), func))
        return out

    def _translate_other_statement(
        self, node: ast.AST, env: LocalEnv, func: FunctionInfo
    ) -> tuple[LocalEnv, list[TacStatement]]:
        """Fall-through: recursively translate components, no gluing."""
        out: list[TacStatement] = []
        for child in ast.iter_child_nodes(node):
            if isinstance(child, ast.stmt):
                env, more = self.translate_statement(child, env, func)
                out.extend(more)
            elif isinstance(child, ast.expr):
                if isinstance(getattr(child, "ctx", None), (ast.Store, ast.Del)):
                    continue
                _, more = self.translate_expression(child, env, func)
                out.extend(more)
            elif isinstance(child, ast.AST) and not isinstance(child, ast.expr_context):
                _, more = self._translate_other_statement(child, env, func)
                out.extend(more)
        return env, out

    # -- assignment targets -------------------------------------------

    def _assign_to_target(
        self,
        target: ast.expr,
        value_vars: set[AnalysisVariable],
        value_stmts: list[TacStatement],
        env: LocalEnv,
        func: FunctionInfo,
    ) -> list[TacStatement]:
        if isinstance(target, ast.Name):
            var = self._bind_assigned_name(target.id, env, func)
            return self._emit_assignment(var, value_vars, value_stmts, func)

        if isinstance(target, ast.Attribute):
            base_vars, out = self.translate_expression(target.value, env, func)
            stmts = value_stmts + out
            for base in _ordered(base_vars):
                for value in _ordered(value_vars):
                    stmts.append(FieldWrite(base, target.attr, value, func))
            return stmts

        if isinstance(target, ast.Subscript):
            base_vars, out = self.translate_expression(target.value, env, func)
            _, index_stmts = self.translate_expression(target.slice, env, func)
            stmts = value_stmts + out + index_stmts
            for base in _ordered(base_vars):
                for value in _ordered(value_vars):
                    stmts.append(FieldWrite(base, SUBSCRIPT_FIELD, value, func))
            return stmts

        if isinstance(target, (ast.Tuple, ast.List)):
            # Destructuring is outside the interpreted subset: the element
            # names become variables but the value flow is dropped.
            for elt in target.elts:
                inner = elt.value if isinstance(elt, ast.Starred) else elt
                if isinstance(inner, ast.Name):
                    self._bind_assigned_name(inner.id, env, func)
                elif isinstance(inner, (ast.Tuple, ast.List)):
                    self._assign_to_target(inner, set(), [], env, func)
            return value_stmts

        if isinstance(target, ast.Starred):
            return self._assign_to_target(target.value, value_vars, value_stmts, env, func)

        return value_stmts

    def _bind_assigned_name(
        self, name: str, env: LocalEnv, func: FunctionInfo
    ) -> AnalysisVariable:
        if func.is_module_init:
            key = f"{func.module}.{name}"
            var = self.global_env.lookup(key)
            if var is None:
                var = self.allocator.fresh(func.module, name)
                self.global_env.bind(key, var)
                self._report(func, 0, f"late global binding for {key}")
            return var
        var = env.lookup(name)
        if var is None:
            var = self.allocator.fresh(func.qualname, name)
            env.bind(name, var)
        return var

    def _emit_assignment(
        self,
        target: AnalysisVariable,
        value_vars: set[AnalysisVariable],
        value_stmts: list[TacStatement],
        func: FunctionInfo,
    ) -> list[TacStatement]:
        # An allocation feeding straight into the target keeps no temp.
        if (
            len(value_stmts) == 1
            and isinstance(value_stmts[0], New)
            and value_vars == {value_stmts[0].lhs}
        ):
            return [New(target, value_stmts[0].obj, func)]
        return value_stmts + [Copy(target, v, func) for v in _ordered(value_vars)]

    # -- imports ------------------------------------------------------

    def translate_import(
        self, node: ast.Import | ast.ImportFrom, env: LocalEnv, func: FunctionInfo
    ) -> list[TacStatement]:
        """Internal from-imports propagate the imported construct's value."""
        minfo = self.module_imports.get(func.module)
        if minfo is None:
            return []
        out: list[TacStatement] = []
        for record in minfo.records_by_node.get(id(node), ()):
            if record.kind != "internal" or not record.is_from:
                continue
            source = self.global_env.lookup(record.target)
            dest = self.global_env.lookup(f"{func.module}.{record.bound_name}")
            if source is None or dest is None:
                self._report(
                    func,
                    node.lineno,
                    f"unresolvable internal import target {record.target}",
                )
                continue
            out.append(Copy(dest, source, func))
        return out

    # -- expressions --------------------------------------------------

    def translate_expression(
        self, node: ast.expr, env: LocalEnv, func: FunctionInfo
    ) -> tuple[set[AnalysisVariable], list[TacStatement]]:
        if isinstance(node, ast.Name):
            return self._translate_name(node, env, func)
        if isinstance(node, ast.Attribute):
            return self._translate_attribute(node, env, func)

        # Complex expression: concrete evaluation first.
        const = self._try_concrete(node, env, func)
        if const is not None:
            return const

        if isinstance(node, ast.Call):
            return self._translate_call(node, env, func)
        if isinstance(node, ast.Subscript):
            return self._translate_subscript(node, env, func)
        if isinstance(node, (ast.List, ast.Tuple, ast.Set)):
            return self._translate_sequence_literal(node, env, func)
        if isinstance(node, ast.Dict):
            return self._translate_dict_literal(node, env, func)
        if isinstance(node, (ast.ListComp, ast.SetComp, ast.DictComp)):
            return self._translate_comprehension(node, env, func)
        return self._translate_other_expression(node, env, func)

    def _translate_name(
        self, node: ast.Name, env: LocalEnv, func: FunctionInfo
    ) -> tuple[set[AnalysisVariable], list[TacStatement]]:
        var = env.lookup(node.id)
        if var is not None:
            return {var}, []
        gvar = self.global_env.lookup(f"{func.module}.{node.id}")
        if gvar is not None:
            return {gvar}, []
        const = self._try_concrete(node, env, func)
        if const is not None:
            return const
        self._report(func, node.lineno, f"unresolved identifier {node.id!r}")
        return set(), []

    def _translate_attribute(
        self, node: ast.Attribute, env: LocalEnv, func: FunctionInfo
    ) -> tuple[set[AnalysisVariable], list[TacStatement]]:
        parts = _dotted_parts(node)
        if parts is not None and env.lookup(parts[0]) is None:
            hit = self._qualified_lookup(parts, func)
            if hit is not None:
                var, rest = hit
                return self._chain_field_reads(var, rest, func)
            head_key = f"{func.module}.{parts[0]}"
            head_var = self.global_env.lookup(head_key)
            abstract_head = head_var is not None and not self.global_env.is_external_alias(
                head_key
            )
            if not abstract_head:
                const = self._try_concrete(node, env, func)
                if const is not None:
                    return const

        base_vars, stmts = self.translate_expression(node.value, env, func)
        result = self.allocator.fresh(func.qualname)
        for base in _ordered(base_vars):
            stmts.append(FieldRead(result, base, node.attr, func))
        if not base_vars:
            self._report(
                func, node.lineno, f"unresolved base of attribute .{node.attr}"
            )
        return {result}, stmts

    def _qualified_lookup(
        self, parts: list[str], func: FunctionInfo
    ) -> tuple[AnalysisVariable, list[str]] | None:
        """Map a dotted chain to a module-level construct in the global env."""
        minfo = self.module_imports.get(func.module)
        head = parts[0]
        expanded = minfo.alias_path.get(head, head) if minfo else head
        full = expanded.split(".") + parts[1:]
        for split in range(len(full) - 1, 0, -1):
            prefix = ".".join(full[:split])
            if prefix not in self.module_names:
                continue
            var = self.global_env.lookup(f"{prefix}.{full[split]}")
            if var is not None:
                return var, full[split + 1 :]
        return None

    def _chain_field_reads(
        self, var: AnalysisVariable, rest: list[str], func: FunctionInfo
    ) -> tuple[set[AnalysisVariable], list[TacStatement]]:
        stmts: list[TacStatement] = []
        current = var
        for name in rest:
            nxt = self.allocator.fresh(func.qualname)
            stmts.append(FieldRead(nxt, current, name, func))
            current = nxt
        return {current}, stmts

    def _translate_call(
        self, node: ast.Call, env: LocalEnv, func: FunctionInfo
    ) -> tuple[set[AnalysisVariable], list[TacStatement]]:
        callee_vars, stmts = self.translate_expression(node.func, env, func)
        arg_sets: list[set[AnalysisVariable]] = []
        for arg in node.args:
            if isinstance(arg, ast.Starred):
                _, more = self.translate_expression(arg.value, env, func)
                stmts.extend(more)
                continue
            vars_, more = self.translate_expression(arg, env, func)
            stmts.extend(more)
            arg_sets.append(vars_)
        for keyword in node.keywords:
            _, more = self.translate_expression(keyword.value, env, func)
            stmts.extend(more)

        result = self.allocator.fresh(func.qualname)
        site = _site_of(func, node)
        # An argument position that resolved to nothing still occupies its
        # slot (as a fresh, empty variable) so the call edge and the flow of
        # the remaining arguments survive.
        arg_choices = [
            _ordered(s) if s else [self.allocator.fresh(func.qualname)]
            for s in arg_sets
        ]
        for combo in itertools.product(_ordered(callee_vars), *arg_choices):
            stmts.append(Call(result, combo[0], tuple(combo[1:]), func, site))
        return {result}, stmts

    def _translate_subscript(
        self, node: ast.Subscript, env: LocalEnv, func: FunctionInfo
    ) -> tuple[set[AnalysisVariable], list[TacStatement]]:
        base_vars, stmts = self.translate_expression(node.value, env, func)
        _, index_stmts = self.translate_expression(node.slice, env, func)
        stmts.extend(index_stmts)
        result = self.allocator.fresh(func.qualname)
        for base in _ordered(base_vars):
            stmts.append(FieldRead(result, base, SUBSCRIPT_FIELD, func))
        return {result}, stmts

    def _translate_sequence_literal(
        self, node: ast.List | ast.Tuple | ast.Set, env: LocalEnv, func: FunctionInfo
    ) -> tuple[set[AnalysisVariable], list[TacStatement]]:
        result = self.allocator.fresh(func.qualname)
        obj = DataObject(_LITERAL_CLASSES[type(node)], _site_of(func, node))
        stmts: list[TacStatement] = [New(result, obj, func)]
        for elt in node.elts:
            inner = elt.value if isinstance(elt, ast.Starred) else elt
            vars_, more = self.translate_expression(inner, env, func)
            stmts.extend(more)
            for value in _ordered(vars_):
                stmts.append(FieldWrite(result, SUBSCRIPT_FIELD, value, func))
        return {result}, stmts

    def _translate_dict_literal(
        self, node: ast.Dict, env: LocalEnv, func: FunctionInfo
    ) -> tuple[set[AnalysisVariable], list[TacStatement]]:
        result = self.allocator.fresh(func.qualname)
        obj = DataObject("dict", _site_of(func, node))
        stmts: list[TacStatement] = [New(result, obj, func)]
        for key, value in zip(node.keys, node.values):
            if key is not None:
                _, more = self.translate_expression(key, env, func)
                stmts.extend(more)
            vars_, more = self.translate_expression(value, env, func)
            stmts.extend(more)
            for v in _ordered(vars_):
                stmts.append(FieldWrite(result, SUBSCRIPT_FIELD, v, func))
        return {result}, stmts

    def _translate_comprehension(
        self,
        node: ast.ListComp | ast.SetComp | ast.DictComp,
        env: LocalEnv,
        func: FunctionInfo,
    ) -> tuple[set[AnalysisVariable], list[TacStatement]]:
        """Desugars to the equivalent for/assign form with a hidden result."""
        result = self.allocator.fresh(func.qualname)
        obj = DataObject(_COMPREHENSION_CLASSES[type(node)], _site_of(func, node))
        stmts: list[TacStatement] = [New(result, obj, func)]
        for gen in node.generators:
            iter_vars, more = self.translate_expression(gen.iter, env, func)
            stmts.extend(more)
            stmts = self._assign_to_target(gen.target, iter_vars, stmts, env, func)
            for cond in gen.ifs:
                _, more = self.translate_expression(cond, env, func)
                stmts.extend(more)
        if isinstance(node, ast.DictComp):
            _, more = self.translate_expression(node.key, env, func)
            stmts.extend(more)
            value_vars, more = self.translate_expression(node.value, env, func)
        else:
            value_vars, more = self.translate_expression(node.elt, env, func)
        stmts.extend(more)
        for value in _ordered(value_vars):
            stmts.append(FieldWrite(result, SUBSCRIPT_FIELD, value, func))
        return {result}, stmts

    def _translate_other_expression(
        self, node: ast.AST, env: LocalEnv, func: FunctionInfo
    ) -> tuple[set[AnalysisVariable], list[TacStatement]]:
        """Fall-through: union of sub-expression results, no gluing."""
        vars_: set[AnalysisVariable] = set()
        stmts: list[TacStatement] = []
        for child in ast.iter_child_nodes(node):
            if isinstance(child, ast.expr):
                if isinstance(getattr(child, "ctx", None), (ast.Store, ast.Del)):
                    continue
                sub_vars, more = self.translate_expression(child, env, func)
                vars_.update(sub_vars)
                stmts.extend(more)
            elif isinstance(child, ast.AST) and not isinstance(
                child, (ast.expr_context, ast.operator, ast.unaryop, ast.boolop, ast.cmpop)
            ):
                sub_vars, more = self._translate_other_expression(child, env, func)
                vars_.update(sub_vars)
                stmts.extend(more)
        return vars_, stmts

    # -- concrete evaluation -------------------------------------------

    def _try_concrete(
        self, node: ast.expr, env: LocalEnv, func: FunctionInfo
    ) -> tuple[set[AnalysisVariable], list[TacStatement]] | None:
        try:
            text = ast.unparse(node)
            ast.parse(text, mode="eval")
        except (SyntaxError, ValueError):
            return None
        response = self.evaluator.eval_expr(text, env.external_imports)
        if not response.ok:
            return None
        result = self.allocator.fresh(func.qualname)
        obj = ConstObject(response.handle, response.type_name, response.repr_text)
        return {result}, [New(result, obj, func)]

    # -- helpers -------------------------------------------------------

    def _external_imports(self, module: str) -> tuple[str, ...]:
        minfo = self.module_imports.get(module)
        return minfo.external_imports if minfo else ()

    def _report(self, func: FunctionInfo, line: int, message: str) -> None:
        if self.diagnostics is not None:
            self.diagnostics.report(func.source_path or func.module, line, message)


def _ordered(vars_: set[AnalysisVariable]) -> list[AnalysisVariable]:
    return sorted(vars_, key=lambda v: v.id)


def _dotted_parts(node: ast.expr) -> list[str] | None:
    """["a", "b", "c"] for a.b.c; None when the base is not a pure name."""
    parts: list[str] = []
    current = node
    while isinstance(current, ast.Attribute):
        parts.append(current.attr)
        current = current.value
    if isinstance(current, ast.Name):
        parts.append(current.id)
        return parts[::-1]
    return None


def _as_load(node: ast.expr) -> ast.expr:
    if isinstance(node, ast.Name):
        out: ast.expr = ast.Name(id=node.id, ctx=ast.Load())
    elif isinstance(node, ast.Attribute):
        out = ast.Attribute(value=node.value, attr=node.attr, ctx=ast.Load())
    elif isinstance(node, ast.Subscript):
        out = ast.Subscript(value=node.value, slice=node.slice, ctx=ast.Load())
    else:
        return node
    return ast.copy_location(out, node)


def _positional_parameters(args: ast.arguments) -> list[ast.arg]:
    return list(args.posonlyargs) + list(args.args)


def _all_parameters(args: ast.arguments) -> list[ast.arg]:
    out = _positional_parameters(args) + list(args.kwonlyargs)
    if args.vararg:
        out.append(args.vararg)
    if args.kwarg:
        out.append(args.kwarg)
    return out


def _site_of(func: FunctionInfo, node: ast.AST) -> str:
    line = getattr(node, "lineno", 0)
    col = getattr(node, "col_offset", 0)
    return f"{func.module}:{line}:{col}"
