"""Hybrid inclusion-based points-to analysis and type inference for Python."""

from .cli import AnalysisResult, classify_equivalence, run_analysis
from .concrete import (
    EvalRequest,
    EvalResponse,
    FixtureEvaluator,
    NullEvaluator,
    SidecarClient,
)
from .diagnostics import Diagnostics
from .frontend import (
    GlobalEnv,
    ImportRecord,
    ModuleUnit,
    classify_imports,
    discover_entry_points,
    init_global_env,
    parse_package,
)
from .hierarchy import Hierarchy, build_hierarchy, c3_linearize
from .objects import PointsToGraph
from .solver import Solver, Worklist
from .tac import Translator
from .typeinfer import Key, infer_types, merge, shallow_scan

__all__ = [
    "AnalysisResult",
    "Diagnostics",
    "EvalRequest",
    "EvalResponse",
    "FixtureEvaluator",
    "GlobalEnv",
    "Hierarchy",
    "ImportRecord",
    "Key",
    "ModuleUnit",
    "NullEvaluator",
    "PointsToGraph",
    "SidecarClient",
    "Solver",
    "Translator",
    "Worklist",
    "build_hierarchy",
    "c3_linearize",
    "classify_equivalence",
    "classify_imports",
    "discover_entry_points",
    "infer_types",
    "init_global_env",
    "merge",
    "parse_package",
    "run_analysis",
    "shallow_scan",
]

__version__ = "0.1.0"
