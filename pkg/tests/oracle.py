"""Brute-force fixpoint oracle for differential testing of the solver.

No worklist and no affected-set bookkeeping: every statement of every
reached function is re-applied in a loop until nothing changes anywhere.
The transfer rules are re-stated here directly so any divergence in the
solver's scheduling or change tracking shows up as a graph mismatch.
"""

from __future__ import annotations

from collections import defaultdict

from pointsto.hierarchy import ClassRecord
from pointsto.objects import DataObject, MetaClsObject, MetaFuncObject
from pointsto.tac import Copy, FieldRead, FieldWrite, New


def naive_fixpoint(functions, hierarchy, entries):
    """Returns (var -> set, (obj, field) -> set) at the fixpoint."""
    var_pt = defaultdict(set)
    field_pt = defaultdict(set)
    reached = set(entries)
    changed = True

    def add_var(var, objs) -> bool:
        before = len(var_pt[var])
        var_pt[var] |= set(objs)
        return len(var_pt[var]) != before

    def add_field(obj, field, objs) -> bool:
        before = len(field_pt[(obj, field)])
        field_pt[(obj, field)] |= set(objs)
        return len(field_pt[(obj, field)]) != before

    def apply(stmt) -> bool:
        nonlocal changed
        if isinstance(stmt, New):
            return add_var(stmt.lhs, {stmt.obj})
        if isinstance(stmt, Copy):
            return add_var(stmt.lhs, var_pt[stmt.rhs])
        if isinstance(stmt, FieldWrite):
            grew = False
            for obj in list(var_pt[stmt.base]):
                grew |= add_field(obj, stmt.field, var_pt[stmt.rhs])
            return grew
        if isinstance(stmt, FieldRead):
            grew = False
            for obj in list(var_pt[stmt.base]):
                if isinstance(obj, DataObject) and isinstance(obj.cls, ClassRecord):
                    func = hierarchy.lookup(obj.cls, stmt.field)
                    if func is not None:
                        grew |= add_var(stmt.lhs, {MetaFuncObject(func, bound_receiver=obj)})
                elif isinstance(obj, MetaClsObject):
                    func = hierarchy.lookup(obj.cls, stmt.field)
                    if func is not None:
                        grew |= add_var(stmt.lhs, {MetaFuncObject(func)})
                grew |= add_var(stmt.lhs, field_pt[(obj, stmt.field)])
            return grew
        return apply_call(stmt)

    def apply_call(stmt) -> bool:
        grew = False
        for obj in list(var_pt[stmt.callee]):
            receiver = None
            callee = None
            if isinstance(obj, DataObject):
                if not isinstance(obj.cls, ClassRecord):
                    continue
                callee = hierarchy.lookup(obj.cls, "__call__")
                receiver = obj
                if callee is None:
                    continue
            elif isinstance(obj, MetaClsObject):
                instance = DataObject(obj.cls, stmt.site)
                grew |= add_var(stmt.lhs, {instance})
                callee = hierarchy.lookup(obj.cls, "__init__")
                receiver = instance
                if callee is None:
                    continue
            elif isinstance(obj, MetaFuncObject):
                callee = obj.func
                receiver = obj.bound_receiver
            else:
                continue
            if callee not in functions:
                continue
            if callee not in reached:
                reached.add(callee)
            env = functions[callee].env
            if receiver is not None and env.params:
                grew |= add_var(env.params[0], {receiver})
            offset = 1 if receiver is not None else 0
            for actual, formal in zip(stmt.args, env.params[offset:]):
                grew |= add_var(formal, var_pt[actual])
            if env.ret_var is not None:
                grew |= add_var(stmt.lhs, var_pt[env.ret_var])
        return grew

    while changed:
        changed = False
        for func in list(reached):
            for stmt in functions[func].statements:
                if apply(stmt):
                    changed = True
    return var_pt, field_pt


def graph_matches_oracle(graph, var_pt, field_pt) -> bool:
    solver_vars = {var: objs for var, objs in graph.var_edges.items() if objs}
    solver_fields = {key: objs for key, objs in graph.field_edges.items() if objs}
    oracle_vars = {var: objs for var, objs in var_pt.items() if objs}
    oracle_fields = {key: objs for key, objs in field_pt.items() if objs}
    return solver_vars == oracle_vars and solver_fields == oracle_fields
