"""Solver-independent mixed-integer linear models."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from numbers import Real
from typing import Iterable, Mapping


class VarKind(enum.Enum):
    BINARY = "binary"
    INTEGER = "integer"
    CONTINUOUS = "continuous"


class Sense(enum.Enum):
    LE = "<="
    GE = ">="
    EQ = "=="


class LinExpr:
    """Sparse affine expression ``sum_i a_i x_i + const`` keyed by variable index."""

    __slots__ = ("terms", "const")

    def __init__(self, terms: Mapping[int, float] | None = None, const: float = 0.0):
        self.terms = dict(terms) if terms else {}
        self.const = float(const)

    @staticmethod
    def of(x) -> "LinExpr":
        if isinstance(x, LinExpr):
            return x
        if isinstance(x, Var):
            return LinExpr({x.index: 1.0})
        if isinstance(x, Real):
            return LinExpr(const=float(x))
        raise TypeError(f"cannot use {type(x).__name__} in a linear expression")

    def copy(self) -> "LinExpr":
        return LinExpr(self.terms, self.const)

    def iadd(self, other, scale: float = 1.0) -> "LinExpr":
        """In-place ``self += scale * other``; returns self."""
        if isinstance(other, Var):
            self.terms[other.index] = self.terms.get(other.index, 0.0) + scale
        elif isinstance(other, Real):
            self.const += scale * float(other)
        else:
            other = LinExpr.of(other)
            for k, v in other.terms.items():
                self.terms[k] = self.terms.get(k, 0.0) + scale * v
            self.const += scale * other.const
        return self

    def __add__(self, other):
        return self.copy().iadd(other)

    __radd__ = __add__

    def __sub__(self, other):
        return self.copy().iadd(other, -1.0)

    def __rsub__(self, other):
        return LinExpr.of(other).copy().iadd(self, -1.0)

    def __neg__(self):
        return LinExpr({k: -v for k, v in self.terms.items()}, -self.const)

    def __mul__(self, k):
        if not isinstance(k, Real):
            return NotImplemented
        k = float(k)
        return LinExpr({i: k * v for i, v in self.terms.items()}, k * self.const)

    __rmul__ = __mul__

    def __le__(self, other):
        return Constraint.make(self, Sense.LE, other)

    def __ge__(self, other):
        return Constraint.make(self, Sense.GE, other)

    def __eq__(self, other):  # type: ignore[override]
        return Constraint.make(self, Sense.EQ, other)

    __hash__ = None  # type: ignore[assignment]

    def value(self, values) -> float:
        return self.const + sum(v * values[k] for k, v in self.terms.items())

    def __repr__(self):
        body = " + ".join(f"{v:g}*x{k}" for k, v in self.terms.items())
        return f"LinExpr({body or '0'} + {self.const:g})"


def quicksum(items: Iterable) -> LinExpr:
    out = LinExpr()
    for it in items:
        out.iadd(it)
    return out


@dataclass(eq=False)
class Var:
    index: int
    name: str
    kind: VarKind
    lo: float
    hi: float

    def _expr(self) -> LinExpr:
        return LinExpr({self.index: 1.0})

    def __add__(self, o):
        return self._expr().iadd(o)

    __radd__ = __add__

    def __sub__(self, o):
        return self._expr().iadd(o, -1.0)

    def __rsub__(self, o):
        return LinExpr.of(o).copy().iadd(self, -1.0)

    def __neg__(self):
        return LinExpr({self.index: -1.0})

    def __mul__(self, k):
        if not isinstance(k, Real):
            return NotImplemented
        return LinExpr({self.index: float(k)})

    __rmul__ = __mul__

    def __le__(self, o):
        return Constraint.make(self._expr(), Sense.LE, o)

    def __ge__(self, o):
        return Constraint.make(self._expr(), Sense.GE, o)

    def __eq__(self, o):  # type: ignore[override]
        return Constraint.make(self._expr(), Sense.EQ, o)

    __hash__ = object.__hash__

    @property
    def is_integral(self) -> bool:
        return self.kind is not VarKind.CONTINUOUS


@dataclass
class Constraint:
    """``sum coeffs * x  (sense)  rhs``; constants are folded into ``rhs``."""

    coeffs: dict[int, float]
    sense: Sense
    rhs: float
    name: str | None = None

    @classmethod
    def make(cls, lhs, sense: Sense, rhs) -> "Constraint":
        e = LinExpr.of(lhs) - LinExpr.of(rhs)
        coeffs = {k: v for k, v in e.terms.items() if v != 0.0}
        return cls(coeffs, sense, -e.const)

    def activity(self, values) -> float:
        return sum(v * values[k] for k, v in self.coeffs.items())

    def satisfied(self, values, tol: float = 1e-6) -> bool:
        a = self.activity(values)
        if self.sense is Sense.LE:
            return a <= self.rhs + tol
        if self.sense is Sense.GE:
            return a >= self.rhs - tol
        return abs(a - self.rhs) <= tol


@dataclass
class Indicator:
    """``guard == value  =>  constraint``."""

    guard: int
    value: int
    constraint: Constraint
    name: str | None = None


class ModelError(ValueError):
    pass


@dataclass
class MilpModel:
    name: str = "model"
    variables: list[Var] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)
    indicators: list[Indicator] = field(default_factory=list)
    objective: LinExpr = field(default_factory=LinExpr)
    _names: dict[str, int] = field(default_factory=dict, repr=False)

    def add_var(self, name: str, kind: VarKind | str = VarKind.CONTINUOUS, lo: float = 0.0, hi: float = math.inf) -> Var:
        kind = VarKind(kind)
        if kind is VarKind.BINARY:
            lo, hi = max(0.0, lo), min(1.0, hi)
        if name in self._names:
            raise ModelError(f"duplicate variable name {name!r}")
        if lo > hi:
            raise ModelError(f"variable {name!r}: empty domain [{lo}, {hi}]")
        v = Var(len(self.variables), name, kind, float(lo), float(hi))
        self.variables.append(v)
        self._names[name] = v.index
        return v

    def binary(self, name: str) -> Var:
        return self.add_var(name, VarKind.BINARY, 0, 1)

    def integer(self, name: str, lo: float = -math.inf, hi: float = math.inf) -> Var:
        return self.add_var(name, VarKind.INTEGER, lo, hi)

    def continuous(self, name: str, lo: float = -math.inf, hi: float = math.inf) -> Var:
        return self.add_var(name, VarKind.CONTINUOUS, lo, hi)

    def var(self, name: str) -> Var:
        return self.variables[self._names[name]]

    def has_var(self, name: str) -> bool:
        return name in self._names

    def add(self, c: Constraint, name: str | None = None) -> Constraint:
        if not isinstance(c, Constraint):
            raise ModelError("add() expects a Constraint (did a comparison collapse to bool?)")
        c.name = name or c.name
        self.constraints.append(c)
        return c

    def add_indicator(self, guard: Var, value: int, c: Constraint, name: str | None = None) -> Indicator:
        if guard.kind is not VarKind.BINARY:
            raise ModelError(f"indicator guard {guard.name!r} is not binary")
        ind = Indicator(guard.index, int(value), c, name)
        self.indicators.append(ind)
        return ind

    def minimize(self, expr) -> None:
        self.objective = LinExpr.of(expr).copy()

    @property
    def num_vars(self) -> int:
        return len(self.variables)

    def validate(self) -> None:
        n = len(self.variables)
        for c in self.constraints + [i.constraint for i in self.indicators]:
            for k in c.coeffs:
                if not 0 <= k < n:
                    raise ModelError(f"constraint {c.name!r} references unknown variable {k}")
        for ind in self.indicators:
            if not 0 <= ind.guard < n or self.variables[ind.guard].kind is not VarKind.BINARY:
                raise ModelError(f"indicator {ind.name!r} has a non-binary guard")
            if ind.value not in (0, 1):
                raise ModelError(f"indicator {ind.name!r} guard value must be 0 or 1")
        for k in self.objective.terms:
            if not 0 <= k < n:
                raise ModelError(f"objective references unknown variable {k}")

    def is_feasible(self, values, tol: float = 1e-6) -> bool:
        """Direct check of an assignment against every constraint and indicator."""
        for v in self.variables:
            x = values[v.index]
            if x < v.lo - tol or x > v.hi + tol:
                return False
            if v.is_integral and abs(x - round(x)) > tol:
                return False
        if not all(c.satisfied(values, tol) for c in self.constraints):
            return False
        for ind in self.indicators:
            if round(values[ind.guard]) == ind.value and not ind.constraint.satisfied(values, tol):
                return False
        return True


def expr_range(coeffs: Mapping[int, float], variables: list[Var]) -> tuple[float, float]:
    """Infimum and supremum of ``sum coeffs*x`` over the variable boxes."""
    lo = hi = 0.0
    for k, a in coeffs.items():
        v = variables[k]
        if a > 0:
            lo += a * v.lo
            hi += a * v.hi
        else:
            lo += a * v.hi
            hi += a * v.lo
    return lo, hi


def linearize_indicators(model: MilpModel) -> MilpModel:
    """Replace indicator constraints by big-M inequalities derived from variable bounds.

    For ``[b == v] => a.x <= c`` this adds ``a.x <= c + M (1 - [b == v])`` with
    ``M = sup(a.x) - c``; ``>=`` is symmetric and ``==`` yields both.
    """
    out = MilpModel(
        name=model.name,
        variables=list(model.variables),
        constraints=list(model.constraints),
        objective=model.objective.copy(),
        _names=dict(model._names),
    )
    for ind in model.indicators:
        c = ind.constraint
        lo, hi = expr_range(c.coeffs, model.variables)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ModelError(f"indicator {ind.name!r}: unbounded variable, cannot derive big-M")
        # active(b) = b if value == 1 else 1 - b ; slack term M*(1 - active)
        sign = 1.0 if ind.value == 1 else -1.0
        parts = []
        if c.sense in (Sense.LE, Sense.EQ):
            m_up = hi - c.rhs
            if m_up > 0:
                parts.append((Sense.LE, m_up))
        if c.sense in (Sense.GE, Sense.EQ):
            m_dn = c.rhs - lo
            if m_dn > 0:
                parts.append((Sense.GE, m_dn))
        for sense, big_m in parts:
            coeffs = dict(c.coeffs)
            # a.x <= rhs + M*(1 - active)  ->  a.x + M*sign*b <= rhs + M*(1 if v==1 else 0)
            direction = 1.0 if sense is Sense.LE else -1.0
            coeffs[ind.guard] = coeffs.get(ind.guard, 0.0) + direction * big_m * sign
            rhs = c.rhs + direction * big_m * (1.0 if ind.value == 1 else 0.0)
            out.constraints.append(Constraint(coeffs, sense, rhs, name=(ind.name and f"{ind.name}_{sense.name.lower()}")))
    return out
