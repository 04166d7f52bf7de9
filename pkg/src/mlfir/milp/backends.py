"""MILP backends: SCIP (native indicators) and HiGHS (big-M linearized)."""
from __future__ import annotations

import enum
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from ..exceptions import BackendUnavailable
from .model import MilpModel, Sense, VarKind, linearize_indicators

logger = logging.getLogger(__name__)

INT_TOL = 1e-6


class Status(enum.Enum):
    OPTIMAL = "optimal"
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    TIMED_OUT = "timed_out"


@dataclass
class SolveOptions:
    time_limit: float | None = None
    threads: int = 1
    seed: int = 0
    relax_listed_integers: frozenset = frozenset()
    backend: str = "scip"
    verbose: bool = False
    gap: float = 0.0


@dataclass
class SolveOutcome:
    status: Status
    values: np.ndarray | None = None
    objective: float | None = None
    gap: float | None = None
    wall_time: float = 0.0
    backend: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def has_solution(self) -> bool:
        return self.values is not None

    @property
    def ok(self) -> bool:
        return self.status is Status.OPTIMAL

    def __getitem__(self, var) -> float:
        if self.values is None:
            raise KeyError("no solution available")
        idx = var if isinstance(var, (int, np.integer)) else var.index
        return float(self.values[idx])


def _round_integral(model: MilpModel, x: np.ndarray, relaxed: set[int]) -> np.ndarray:
    x = np.array(x, dtype=float)
    for v in model.variables:
        if v.is_integral and v.index not in relaxed:
            r = round(x[v.index])
            if abs(x[v.index] - r) > INT_TOL:
                logger.warning("variable %s = %.9g not integral within tolerance", v.name, x[v.index])
            x[v.index] = r
    return x


def _relaxed_indices(model: MilpModel, relax) -> set[int]:
    out = set()
    for r in relax:
        if isinstance(r, str):
            out.add(model.var(r).index)
        elif hasattr(r, "index"):
            out.add(r.index)
        else:
            out.add(int(r))
    return out


def available_backends() -> list[str]:
    names = []
    try:
        import pyscipopt  # noqa: F401

        names.append("scip")
    except ImportError:
        pass
    try:
        import scipy.optimize  # noqa: F401

        names.append("highs")
    except ImportError:
        pass
    return names


def _build_scip(model: MilpModel, opts: SolveOptions, relaxed: set[int]):
    """SCIP model mirroring ``model``; ``None`` when a constant row is violated."""
    try:
        import pyscipopt
    except ImportError as exc:
        raise BackendUnavailable("pyscipopt is not installed") from exc

    m = pyscipopt.Model(model.name)
    if not opts.verbose:
        m.hideOutput()
    m.setParam("randomization/randomseedshift", int(opts.seed))
    m.setParam("parallel/maxnthreads", max(1, int(opts.threads)))
    if opts.time_limit is not None:
        m.setParam("limits/time", float(opts.time_limit))
    if opts.gap:
        m.setParam("limits/gap", float(opts.gap))
    # indicator presolving has been seen to declare feasible models infeasible
    m.setParam("constraints/indicator/maxprerounds", 0)

    vtype = {VarKind.BINARY: "B", VarKind.INTEGER: "I", VarKind.CONTINUOUS: "C"}
    xs = []
    for v in model.variables:
        kind = VarKind.CONTINUOUS if v.index in relaxed else v.kind
        lb = None if v.lo == -math.inf else v.lo
        ub = None if v.hi == math.inf else v.hi
        xs.append(m.addVar(name=v.name, vtype=vtype[kind], lb=lb, ub=ub))

    def expr(coeffs):
        return pyscipopt.quicksum(a * xs[k] for k, a in coeffs.items())

    def add(c, name):
        e = expr(c.coeffs)
        if c.sense is Sense.LE:
            m.addCons(e <= c.rhs, name=name)
        elif c.sense is Sense.GE:
            m.addCons(e >= c.rhs, name=name)
        else:
            m.addCons(e == c.rhs, name=name)

    for i, c in enumerate(model.constraints):
        if c.coeffs:
            add(c, c.name or f"c{i}")
        elif not _trivially_true(c):
            return None, xs

    for i, ind in enumerate(model.indicators):
        c = ind.constraint
        guard = xs[ind.guard]
        name = ind.name or f"ind{i}"
        rows = []
        if c.sense in (Sense.LE, Sense.EQ):
            rows.append((c.coeffs, c.rhs))
        if c.sense in (Sense.GE, Sense.EQ):
            rows.append(({k: -a for k, a in c.coeffs.items()}, -c.rhs))
        for j, (coeffs, rhs) in enumerate(rows):
            if not coeffs:
                if rhs < 0:
                    m.addCons(guard == 1 - ind.value)
                continue
            m.addConsIndicator(expr(coeffs) <= rhs, guard, activeone=bool(ind.value), name=f"{name}_{j}")

    obj = model.objective
    m.setObjective(expr(obj.terms) + obj.const, "minimize")
    return m, xs


def _solve_scip(model: MilpModel, opts: SolveOptions, relaxed: set[int]) -> SolveOutcome:
    m, xs = _build_scip(model, opts, relaxed)
    if m is None:
        return SolveOutcome(Status.INFEASIBLE, backend="scip")
    t0 = time.perf_counter()
    m.optimize()
    wall = time.perf_counter() - t0
    st = m.getStatus()
    nsols = m.getNSols()
    values = None
    if nsols > 0:
        sol = m.getBestSol()
        values = _round_integral(model, [m.getSolVal(sol, x) for x in xs], relaxed)
    if st == "optimal":
        status = Status.OPTIMAL
    elif st == "infeasible":
        status = Status.INFEASIBLE
    elif st in ("unbounded", "inforunbd"):
        status = Status.UNBOUNDED
    elif st in ("timelimit", "userinterrupt", "nodelimit", "memlimit", "gaplimit", "sollimit"):
        status = Status.TIMED_OUT if st != "gaplimit" else Status.FEASIBLE
    else:
        status = Status.FEASIBLE if nsols else Status.TIMED_OUT
    objective = float(model.objective.value(values)) if values is not None else None
    gap = m.getGap() if values is not None else None
    if status in (Status.INFEASIBLE, Status.UNBOUNDED):
        values, objective = None, None
    return SolveOutcome(status, values, objective, gap, wall, "scip")


def _trivially_true(c) -> bool:
    if c.sense is Sense.LE:
        return 0.0 <= c.rhs + 1e-9
    if c.sense is Sense.GE:
        return 0.0 >= c.rhs - 1e-9
    return abs(c.rhs) <= 1e-9


def _solve_highs(model: MilpModel, opts: SolveOptions, relaxed: set[int]) -> SolveOutcome:
    from scipy.optimize import Bounds, LinearConstraint, milp
    from scipy.sparse import coo_array

    lin = linearize_indicators(model) if model.indicators else model
    n = lin.num_vars
    rows, cols, data, lb, ub = [], [], [], [], []
    r = 0
    for c in lin.constraints:
        if not c.coeffs:
            if not _trivially_true(c):
                return SolveOutcome(Status.INFEASIBLE, backend="highs")
            continue
        for k, a in c.coeffs.items():
            rows.append(r)
            cols.append(k)
            data.append(a)
        lb.append(-np.inf if c.sense is Sense.LE else c.rhs)
        ub.append(np.inf if c.sense is Sense.GE else c.rhs)
        r += 1
    constraints = []
    if r:
        A = coo_array((data, (rows, cols)), shape=(r, n)).tocsr()
        constraints.append(LinearConstraint(A, lb, ub))
    cvec = np.zeros(n)
    for k, a in lin.objective.terms.items():
        cvec[k] = a
    integrality = np.array(
        [0 if (v.kind is VarKind.CONTINUOUS or v.index in relaxed) else 1 for v in lin.variables]
    )
    bounds = Bounds([v.lo for v in lin.variables], [v.hi for v in lin.variables])
    options = {"disp": bool(opts.verbose), "presolve": True}
    if opts.time_limit is not None:
        options["time_limit"] = float(opts.time_limit)
    if opts.gap:
        options["mip_rel_gap"] = float(opts.gap)
    t0 = time.perf_counter()
    res = milp(cvec, constraints=constraints, integrality=integrality, bounds=bounds, options=options)
    wall = time.perf_counter() - t0
    values = None
    if res.x is not None:
        values = _round_integral(model, res.x[: model.num_vars], relaxed)
    if res.status == 0:
        status = Status.OPTIMAL
    elif res.status == 2:
        status, values = Status.INFEASIBLE, None
    elif res.status == 3:
        status, values = Status.UNBOUNDED, None
    elif res.status == 1:
        status = Status.TIMED_OUT
    else:
        status = Status.FEASIBLE if values is not None else Status.TIMED_OUT
    objective = float(model.objective.value(values)) if values is not None else None
    gap = getattr(res, "mip_gap", None)
    return SolveOutcome(status, values, objective, gap, wall, "highs")


_BACKENDS = {"scip": _solve_scip, "highs": _solve_highs}


def solve(model: MilpModel, options: SolveOptions | None = None, **kwargs) -> SolveOutcome:
    """Solve ``model`` with the configured backend.

    Variables listed in ``relax_listed_integers`` (names, Vars or indices) are
    declared continuous. Integer values in the returned assignment are rounded.
    """
    opts = options or SolveOptions()
    if kwargs:
        opts = SolveOptions(**{**opts.__dict__, **kwargs})
    model.validate()
    try:
        fn = _BACKENDS[opts.backend]
    except KeyError:
        raise BackendUnavailable(f"unknown backend {opts.backend!r}; choose from {sorted(_BACKENDS)}") from None
    relaxed = _relaxed_indices(model, opts.relax_listed_integers)
    out = fn(model, opts, relaxed)
    logger.debug("%s solve of %s: %s obj=%s in %.2fs", out.backend, model.name, out.status.value, out.objective, out.wall_time)
    return out
