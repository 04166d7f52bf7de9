"""CPLEX-style LP text export, for inspecting models with external tools."""
from __future__ import annotations

import math
import re

from .model import MilpModel, Sense, VarKind

_OPS = {Sense.LE: "<=", Sense.GE: ">=", Sense.EQ: "="}


def _safe(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.]", "_", name)


def _terms(coeffs, names) -> str:
    parts = []
    for k, a in coeffs.items():
        if a == 0:
            continue
        sign = "-" if a < 0 else "+"
        parts.append(f"{sign} {abs(a):.17g} {names[k]}")
    if not parts:
        return "0 " + names[0] if names else "0"
    s = " ".join(parts)
    return s[2:] if s.startswith("+ ") else s


def write_lp(model: MilpModel) -> str:
    names = [_safe(v.name) for v in model.variables]
    out = [f"\\* {model.name} *\\", "Minimize"]
    obj = _terms(model.objective.terms, names) if model.objective.terms else ("0 " + names[0] if names else "0")
    out.append(f" obj: {obj}")
    if model.objective.const:
        out.append(f"\\* objective constant {model.objective.const:.17g} *\\")
    out.append("Subject To")
    for i, c in enumerate(model.constraints):
        if not c.coeffs:
            continue
        out.append(f" {_safe(c.name or f'c{i}')}: {_terms(c.coeffs, names)} {_OPS[c.sense]} {c.rhs:.17g}")
    for i, ind in enumerate(model.indicators):
        c = ind.constraint
        out.append(
            f" {_safe(ind.name or f'ind{i}')}: {names[ind.guard]} = {ind.value} -> "
            f"{_terms(c.coeffs, names)} {_OPS[c.sense]} {c.rhs:.17g}"
        )
    out.append("Bounds")
    for v, n in zip(model.variables, names):
        if v.kind is VarKind.BINARY and v.lo == 0 and v.hi == 1:
            continue
        lo = "-inf" if v.lo == -math.inf else f"{v.lo:.17g}"
        hi = "+inf" if v.hi == math.inf else f"{v.hi:.17g}"
        out.append(f" {lo} <= {n} <= {hi}")
    ints = [n for v, n in zip(model.variables, names) if v.kind is VarKind.INTEGER]
    bins = [n for v, n in zip(model.variables, names) if v.kind is VarKind.BINARY]
    if ints:
        out.append("General")
        out.extend(f" {n}" for n in ints)
    if bins:
        out.append("Binary")
        out.extend(f" {n}" for n in bins)
    out.append("End")
    return "\n".join(out) + "\n"
