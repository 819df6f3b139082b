"""Worklist fixpoint over inclusion constraints, with concrete dispatch.

The solver owns the points-to graph and the table of translated functions.
Statements are solved as constraints; each solve returns the minimal set of
functions whose constraints may now produce new facts:

* new / copy / field read / call: the enclosing function (plus the callee
  for calls), since only sets visible there changed;
* field write: every translated function, since a new object reachable
  through a field may surface anywhere.

Functions and classes are first-class: class values allocate data objects
when called, function values dispatch to their definition, and data objects
dispatch through the hierarchy. Concrete (evaluator-held) values are
dispatched to the evaluator instead.
"""

from __future__ import annotations

from collections import deque
from typing import TYPE_CHECKING, Callable, Iterable

from .objects import (
    SUBSCRIPT_FIELD,
    ConstObject,
    DataObject,
    MetaClsObject,
    MetaFuncObject,
    PointsToGraph,
)
from .tac import (
    Call,
    Copy,
    FieldRead,
    FieldWrite,
    FunctionInfo,
    FunctionTable,
    New,
    TacStatement,
    TranslatedFunction,
)

if TYPE_CHECKING:
    from .concrete import Evaluator
    from .diagnostics import Diagnostics
    from .hierarchy import ClassRecord, Hierarchy

DEFAULT_CONCRETE_CALL_CAP = 16


class Worklist:
    """FIFO queue of function identities, deduplicating enqueues."""

    def __init__(self) -> None:
        self._queue: deque[FunctionInfo] = deque()
        self._queued: set[FunctionInfo] = set()

    def add(self, func: FunctionInfo) -> None:
        if func not in self._queued:
            self._queued.add(func)
            self._queue.append(func)

    def extend(self, funcs: Iterable[FunctionInfo]) -> None:
        for func in funcs:
            self.add(func)

    def pop(self) -> FunctionInfo:
        func = self._queue.popleft()
        self._queued.discard(func)
        return func

    def __bool__(self) -> bool:
        return bool(self._queue)

    def __len__(self) -> int:
        return len(self._queue)


def affected_functions(
    statement: TacStatement, changed: bool, table: FunctionTable
) -> set[FunctionInfo]:
    """Functions to revisit after a change caused by ``statement``."""
    if not changed:
        return set()
    if isinstance(statement, FieldWrite):
        return set(table)
    return {statement.func}


class Solver:
    def __init__(
        self,
        graph: PointsToGraph,
        hierarchy: "Hierarchy",
        translate: Callable[[FunctionInfo], TranslatedFunction],
        evaluator: "Evaluator",
        diagnostics: "Diagnostics | None" = None,
        module_inits: Iterable[FunctionInfo] = (),
        concrete_call_cap: int = DEFAULT_CONCRETE_CALL_CAP,
    ) -> None:
        self.graph = graph
        self.hierarchy = hierarchy
        self.translate = translate
        self.evaluator = evaluator
        self.diagnostics = diagnostics
        self.module_inits = list(module_inits)
        self.concrete_call_cap = concrete_call_cap
        self.table: FunctionTable = {}
        self._concrete_calls_per_site: dict[str, int] = {}
        self._fired_concrete_calls: set[tuple] = set()

    # -- driving -------------------------------------------------------

    def ensure_translated(self, func: FunctionInfo) -> bool:
        """Translate on demand; True iff this call populated the entry."""
        if func in self.table:
            return False
        self.table[func] = self.translate(func)
        return True

    def run(self, entries: Iterable[FunctionInfo]) -> PointsToGraph:
        worklist = Worklist()
        for func in list(entries) + self.module_inits:
            self.ensure_translated(func)
            worklist.add(func)
        while True:
            while worklist:
                func = worklist.pop()
                for stmt in self.table[func].statements:
                    worklist.extend(self.solve_statement(stmt))
            # The per-statement affected sets are function-granular and do
            # not notify callers when a return slot grows inside the callee,
            # nor readers of a module-level variable written elsewhere. A
            # full sweep catches those; the run is converged once one sweep
            # reports no affected functions.
            stale = self._sweep()
            if not stale:
                return self.graph
            worklist.extend(stale)

    def _sweep(self) -> set[FunctionInfo]:
        affected: set[FunctionInfo] = set()
        for func in list(self.table):
            for stmt in self.table[func].statements:
                affected |= self.solve_statement(stmt)
        return affected

    def solve_statement(self, stmt: TacStatement) -> set[FunctionInfo]:
        if isinstance(stmt, New):
            return self.solve_new(stmt)
        if isinstance(stmt, Copy):
            return self.solve_copy(stmt)
        if isinstance(stmt, FieldWrite):
            return self.solve_field_write(stmt)
        if isinstance(stmt, FieldRead):
            return self.solve_field_read(stmt)
        return self.solve_call(stmt)

    # -- constraint rules ------------------------------------------------

    def solve_new(self, stmt: New) -> set[FunctionInfo]:
        changed = self.graph.add(stmt.lhs, stmt.obj)
        return affected_functions(stmt, changed, self.table)

    def solve_copy(self, stmt: Copy) -> set[FunctionInfo]:
        changed = self.graph.add(stmt.lhs, self.graph.points_to(stmt.rhs))
        return affected_functions(stmt, changed, self.table)

    def solve_field_write(self, stmt: FieldWrite) -> set[FunctionInfo]:
        values = self.graph.points_to(stmt.rhs)
        changed = False
        for obj in list(self.graph.points_to(stmt.base)):
            if self.graph.add_field(obj, stmt.field, values):
                changed = True
        return affected_functions(stmt, changed, self.table)

    def solve_field_read(self, stmt: FieldRead) -> set[FunctionInfo]:
        changed = False
        for obj in list(self.graph.points_to(stmt.base)):
            if isinstance(obj, DataObject):
                func = self._hierarchy_lookup(obj.cls, stmt.field)
                if func is not None:
                    changed |= self.graph.add(
                        stmt.lhs, MetaFuncObject(func, bound_receiver=obj)
                    )
            elif isinstance(obj, MetaClsObject):
                func = self.hierarchy.lookup(obj.cls, stmt.field)
                if func is not None:
                    changed |= self.graph.add(stmt.lhs, MetaFuncObject(func))
            elif isinstance(obj, ConstObject) and stmt.field != SUBSCRIPT_FIELD:
                response = self.evaluator.get_attr(obj.handle, stmt.field)
                if response.ok:
                    changed |= self.graph.add(
                        stmt.lhs,
                        ConstObject(response.handle, response.type_name, response.repr_text),
                    )
                else:
                    self._report(stmt, f"concrete attribute {stmt.field!r} failed: {response.error}")
            # Stored field edges propagate for every object kind.
            changed |= self.graph.add(stmt.lhs, self.graph.field(obj, stmt.field))
        return affected_functions(stmt, changed, self.table)

    def solve_call(self, stmt: Call) -> set[FunctionInfo]:
        affected: set[FunctionInfo] = set()
        enclosing_changed = False

        for obj in list(self.graph.points_to(stmt.callee)):
            if isinstance(obj, ConstObject):
                if self._solve_concrete_call(stmt, obj):
                    enclosing_changed = True
                continue

            receiver = None
            callee: FunctionInfo | None = None
            if isinstance(obj, DataObject):
                callee = self._hierarchy_lookup(obj.cls, "__call__")
                receiver = obj
                if callee is None:
                    self._report(stmt, f"no __call__ on {obj.class_name}")
                    continue
            elif isinstance(obj, MetaClsObject):
                new_obj = DataObject(obj.cls, stmt.site)
                if self.graph.add(stmt.lhs, new_obj):
                    enclosing_changed = True
                callee = self.hierarchy.lookup(obj.cls, "__init__")
                receiver = new_obj
                if callee is None:
                    # The instance is allocated either way; only the
                    # constructor edge is skipped.
                    continue
            elif isinstance(obj, MetaFuncObject):
                callee = obj.func
                receiver = obj.bound_receiver
            else:
                continue

            if self.ensure_translated(callee):
                affected.add(callee)
            translated = self.table[callee]
            callee_changed = False

            if receiver is not None:
                if translated.env.params:
                    callee_changed |= self.graph.add(translated.env.params[0], receiver)
                else:
                    self._report(stmt, f"receiver dropped: {callee.qualname} has no parameters")
            offset = 1 if receiver is not None else 0
            for actual, formal in zip(stmt.args, translated.env.params[offset:]):
                callee_changed |= self.graph.add(formal, self.graph.points_to(actual))
            if translated.env.ret_var is not None:
                if self.graph.add(stmt.lhs, self.graph.points_to(translated.env.ret_var)):
                    enclosing_changed = True
            if callee_changed:
                affected.add(callee)
                affected.add(stmt.func)

        if enclosing_changed:
            affected.add(stmt.func)
        return affected

    def _solve_concrete_call(self, stmt: Call, obj: ConstObject) -> bool:
        """Execute the call when every argument has a concrete value."""
        arg_choices = []
        for var in stmt.args:
            consts = sorted(
                (o for o in self.graph.points_to(var) if isinstance(o, ConstObject)),
                key=lambda o: o.handle,
            )
            if not consts:
                return False
            arg_choices.append(consts)

        changed = False
        combos = [[]]
        for choices in arg_choices:
            combos = [prefix + [c] for prefix in combos for c in choices]
        for combo in combos:
            fired_key = (stmt.site, obj.handle, tuple(c.handle for c in combo))
            if fired_key in self._fired_concrete_calls:
                continue
            used = self._concrete_calls_per_site.get(stmt.site, 0)
            if used >= self.concrete_call_cap:
                self._report(stmt, "concrete call combination cap reached")
                break
            self._concrete_calls_per_site[stmt.site] = used + 1
            self._fired_concrete_calls.add(fired_key)
            response = self.evaluator.call_handle(
                obj.handle, [{"h": c.handle} for c in combo]
            )
            if response.ok:
                changed |= self.graph.add(
                    stmt.lhs,
                    ConstObject(response.handle, response.type_name, response.repr_text),
                )
            else:
                self._report(stmt, f"concrete call failed: {response.error}")
        return changed

    # -- helpers ---------------------------------------------------------

    def _hierarchy_lookup(self, cls: "ClassRecord | str", name: str):
        if isinstance(cls, str):  # builtin container classes have no members
            return None
        return self.hierarchy.lookup(cls, name)

    def _report(self, stmt: TacStatement, message: str) -> None:
        if self.diagnostics is not None:
            self.diagnostics.report(stmt.func.source_path or stmt.func.module, 0, message)
