from .backends import SolveOptions, SolveOutcome, Status, available_backends, solve
from .lpfile import write_lp
from .model import (
    Constraint,
    Indicator,
    LinExpr,
    MilpModel,
    ModelError,
    Sense,
    Var,
    VarKind,
    expr_range,
    linearize_indicators,
    quicksum,
)

__all__ = [
    "Constraint",
    "Indicator",
    "LinExpr",
    "MilpModel",
    "ModelError",
    "Sense",
    "SolveOptions",
    "SolveOutcome",
    "Status",
    "Var",
    "VarKind",
    "available_backends",
    "expr_range",
    "linearize_indicators",
    "quicksum",
    "solve",
    "write_lp",
]
