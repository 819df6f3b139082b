"""Heap model: abstract object kinds and the points-to graph.

Objects come in four kinds. Three are abstract, i.e. derived from source
code of the package under analysis:

* ``DataObject`` -- an instance, identified by its class and allocation site;
* ``MetaFuncObject`` -- a function value (a closure when a receiver is bound);
* ``MetaClsObject`` -- a class value.

The fourth kind, ``ConstObject``, is a handle into a live evaluator session
and stands for a concrete runtime value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Union

if TYPE_CHECKING:
    from .hierarchy import ClassRecord
    from .tac import AnalysisVariable, FunctionInfo


@dataclass(frozen=True)
class DataObject:
    """An instance of a class, one object per (class, allocation site)."""

    cls: "ClassRecord | str"  # a package class, or a builtin class name
    site: str

    @property
    def class_name(self) -> str:
        cls = self.cls
        return cls if isinstance(cls, str) else cls.qualname

    def __repr__(self) -> str:
        return f"(data {self.class_name} @{self.site})"


@dataclass(frozen=True)
class MetaFuncObject:
    """A function value; ``bound_receiver`` is set for bound methods."""

    func: "FunctionInfo"
    bound_receiver: "AbstractObject | None" = None

    def __repr__(self) -> str:
        bound = f" bound={self.bound_receiver!r}" if self.bound_receiver else ""
        return f"(meta-func {self.func.qualname}{bound})"


@dataclass(frozen=True)
class MetaClsObject:
    """A class value."""

    cls: "ClassRecord"

    def __repr__(self) -> str:
        return f"(meta-cls {self.cls.qualname})"


@dataclass(frozen=True)
class ConstObject:
    """A concrete value held by the evaluator; identity is the handle."""

    handle: int
    type_name: str = field(compare=False)
    repr_text: str = field(compare=False, default="")

    def __repr__(self) -> str:
        return f"(const #{self.handle} {self.type_name} {self.repr_text})"


AbstractObject = Union[DataObject, MetaFuncObject, MetaClsObject, ConstObject]

# Distinguished field used for subscript reads/writes.
SUBSCRIPT_FIELD = "[]"


class PointsToGraph:
    """Map from variables and (object, field) pairs to object sets.

    All updates are unions, so the graph only ever grows during a run.
    """

    def __init__(self) -> None:
        self.var_edges: dict["AnalysisVariable", set[AbstractObject]] = {}
        self.field_edges: dict[tuple[AbstractObject, str], set[AbstractObject]] = {}

    def points_to(self, var: "AnalysisVariable") -> set[AbstractObject]:
        return self.var_edges.get(var, set())

    def field(self, obj: AbstractObject, name: str) -> set[AbstractObject]:
        return self.field_edges.get((obj, name), set())

    def add(self, var: "AnalysisVariable", objs) -> bool:
        """Union ``objs`` into the variable's set; True iff it grew."""
        if isinstance(objs, (DataObject, MetaFuncObject, MetaClsObject, ConstObject)):
            objs = (objs,)
        current = self.var_edges.setdefault(var, set())
        before = len(current)
        current.update(objs)
        return len(current) != before

    def add_field(self, obj: AbstractObject, name: str, objs) -> bool:
        """Union ``objs`` into the (object, field) set; True iff it grew."""
        current = self.field_edges.setdefault((obj, name), set())
        before = len(current)
        current.update(objs)
        return len(current) != before

    def snapshot_sizes(self) -> dict:
        """Current cardinality of every set, for monotonicity checks."""
        sizes: dict = {}
        for var, objs in self.var_edges.items():
            sizes[var] = len(objs)
        for key, objs in self.field_edges.items():
            sizes[key] = len(objs)
        return sizes

    def equal_edges(self, other: "PointsToGraph") -> bool:
        """Structural equality, ignoring empty sets."""
        return _nonempty(self.var_edges) == _nonempty(other.var_edges) and _nonempty(
            self.field_edges
        ) == _nonempty(other.field_edges)


def _nonempty(edges: dict) -> dict:
    return {k: v for k, v in edges.items() if v}


def describe_object(obj: AbstractObject) -> dict:
    """Export descriptor for one object: tag plus identifying names."""
    if isinstance(obj, DataObject):
        return {"tag": "data", "class": obj.class_name}
    if isinstance(obj, MetaFuncObject):
        return {"tag": "meta-func", "def": obj.func.qualname}
    if isinstance(obj, MetaClsObject):
        return {"tag": "meta-cls", "class": obj.cls.qualname}
    return {"tag": "const", "type_name": obj.type_name, "repr": obj.repr_text}


def export_graph(graph: PointsToGraph) -> dict[str, list[dict]]:
    """Serialize var edges as display identity -> sorted object descriptors."""
    out: dict[str, list[dict]] = {}
    for var, objs in graph.var_edges.items():
        if not objs:
            continue
        key = f"{var.owner}.{var.display_name}"
        descriptors = [describe_object(o) for o in objs]
        out[key] = sorted(descriptors, key=lambda d: sorted(d.items()).__repr__())
    return out
