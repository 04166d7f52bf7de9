"""Adder-count-fixed formulation: for a given number of multiplier-block adders,
minimize structural adders; iterate the adder count to minimize the total.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .bounds import CoefficientBounds
from .exceptions import GraphError, IntegerInfeasible, SolverTimeout
from .graph import AdderGraph, AdderNode, DesignSolution, Edge, Optimality, Output
from .grid import FrequencyGrid
from .milp import LinExpr, MilpModel, SolveOptions, SolveOutcome, Status, quicksum, solve
from .spec import FilterSpec, basis_matrix, structural_adder_count, structural_adder_weights

logger = logging.getLogger(__name__)

SIDES = ("l", "r")


@dataclass
class Ilp1Instance:
    model: MilpModel
    n_adders: int
    num_coefficients: int
    wordlength: int
    shift_range: tuple[int, int]
    order: int | None = None
    ftype: object = None
    h: list = field(default_factory=list)
    hz: list = field(default_factory=list)
    gain: object = None
    c: dict = field(default_factory=dict)
    aux: dict = field(default_factory=dict)
    cin: dict = field(default_factory=dict)
    csh: dict = field(default_factory=dict)
    csg: dict = field(default_factory=dict)
    sel: dict = field(default_factory=dict)  # (a, i, k)
    varphi: dict = field(default_factory=dict)  # (a, i, s)
    sign: dict = field(default_factory=dict)  # (a, i)
    o: dict = field(default_factory=dict)  # (a, m, s, phi)
    relaxable: list = field(default_factory=list)


def default_shift_range(wordlength: int) -> tuple[int, int]:
    return -(wordlength + 1), wordlength + 1


def add_frequency_constraints(model: MilpModel, spec: FilterSpec, grid: FrequencyGrid, h: Sequence, gain) -> None:
    """``G 2^B D_lo(w) <= sum_m h_m c_m(w) <= G 2^B D_hi(w)`` at every grid point."""
    V = basis_matrix(spec.ftype, spec.num_coefficients, grid.omega)
    scale = float(spec.scale)
    for i in range(len(grid)):
        resp = LinExpr({h[m].index: float(V[i, m]) for m in range(len(h)) if V[i, m] != 0.0})
        lo, hi = grid.lower[i], grid.upper[i]
        if spec.gain.variable:
            if math.isfinite(hi):
                model.add(resp - scale * hi * gain <= 0, name=f"C1a_hi_{i}")
            if math.isfinite(lo):
                model.add(resp - scale * lo * gain >= 0, name=f"C1a_lo_{i}")
        else:
            g = spec.gain.value
            if math.isfinite(hi):
                model.add(resp <= g * scale * hi, name=f"C1a_hi_{i}")
            if math.isfinite(lo):
                model.add(resp >= g * scale * lo, name=f"C1a_lo_{i}")


def _coefficient_vars(model, spec, bounds, relax):
    M = spec.num_coefficients
    h, hz = [], []
    for m in range(M):
        lo, hi = bounds.lo[m], bounds.hi[m]
        kind = "continuous" if relax else "integer"
        h.append(model.add_var(f"h_{m}", kind, lo, hi))
        z = model.binary(f"hz_{m}")
        if not lo <= 0 <= hi:
            z.hi = 0.0
        hz.append(z)
    gain = None
    if spec.gain.variable:
        gain = model.continuous("G", *spec.gain.bounds)
    return h, hz, gain


def _structural_objective(spec: FilterSpec, hz) -> LinExpr:
    weights = structural_adder_weights(spec.ftype, spec.num_coefficients)
    obj = LinExpr(const=float(spec.order))
    for w, z in zip(weights, hz):
        if w:
            obj.iadd(z, -float(w))
    return obj


def build_sparse_model(spec: FilterSpec, grid: FrequencyGrid, bounds: CoefficientBounds) -> tuple[MilpModel, list, list, object]:
    """Frequency, gain and zero-coefficient constraints only: yields the sparsest filter."""
    model = MilpModel(name="sparse")
    h, hz, gain = _coefficient_vars(model, spec, bounds, relax=False)
    add_frequency_constraints(model, spec, grid, h, gain)
    for m in range(spec.num_coefficients):
        model.add_indicator(hz[m], 1, h[m] == 0, name=f"C3b_{m}")
    model.minimize(_structural_objective(spec, hz))
    return model, h, hz, gain


def _build_mb(inst: Ilp1Instance, cmax: int) -> None:
    """Multiplier block constraints: node values, input selection, shifts and signs."""
    model = inst.model
    smin, smax = inst.shift_range
    inst.c[0] = model.add_var("c_0", "continuous", 1, 1)
    for a in range(1, inst.n_adders + 1):
        aux = model.integer(f"aux_{a}", 0, (cmax - 1) // 2)
        ca = model.continuous(f"c_{a}", 1, cmax)
        inst.aux[a], inst.c[a] = aux, ca
        model.add(ca == 2 * aux + 1, name=f"odd_{a}")
        for i in SIDES:
            cin = model.continuous(f"cin_{a}_{i}", 1, cmax)
            csh = model.continuous(f"csh_{a}_{i}", 0, 2 * cmax)
            csg = model.continuous(f"csg_{a}_{i}", -2 * cmax, 2 * cmax)
            inst.cin[a, i], inst.csh[a, i], inst.csg[a, i] = cin, csh, csg
            inst.relaxable += [cin, csh, csg]
            sels = []
            for k in range(a):
                sk = model.binary(f"sel_{a}_{i}_{k}")
                inst.sel[a, i, k] = sk
                sels.append(sk)
                model.add_indicator(sk, 1, cin - inst.c[k] == 0, name=f"C6a_{a}_{i}_{k}")
            model.add(quicksum(sels) == 1, name=f"C6b_{a}_{i}")
            shifts = []
            for s in range(smin, smax + 1):
                if i == "l" and s > 0:
                    continue  # left input is never left-shifted
                vs = model.binary(f"varphi_{a}_{i}_{s}")
                inst.varphi[a, i, s] = vs
                shifts.append(vs)
                model.add_indicator(vs, 1, csh - (2.0 ** s) * cin == 0, name=f"C7a_{a}_{i}_{s}")
            model.add(quicksum(shifts) == 1, name=f"C7b_{a}_{i}")
            sg = model.binary(f"sign_{a}_{i}")
            inst.sign[a, i] = sg
            model.add_indicator(sg, 1, csg + csh == 0, name=f"C8a_{a}_{i}")
            model.add_indicator(sg, 0, csg - csh == 0, name=f"C8b_{a}_{i}")
        for s in range(smin, 0):
            model.add(inst.varphi[a, "l", s] - inst.varphi[a, "r", s] == 0, name=f"C7d_{a}_{s}")
        model.add(inst.sign[a, "l"] + inst.sign[a, "r"] <= 1, name=f"C8c_{a}")
        model.add(ca - inst.csg[a, "l"] - inst.csg[a, "r"] == 0, name=f"C5_{a}")


def _trailing_zeros(x: int) -> int:
    x = abs(x)
    return (x & -x).bit_length() - 1


def _output_options(inst: Ilp1Instance, m: int, lo: int, hi: int, target: int | None):
    """Admissible (a, s, phi) for coefficient m given its range (or fixed target)."""
    B = inst.wordlength
    opts = []
    for a in range(inst.n_adders + 1):
        for s in range(0, B + 1):
            for phi in (0, 1):
                p = 1 << s
                if target is not None:
                    if target == 0 or _trailing_zeros(target) != s or (target < 0) != bool(phi):
                        continue
                    if a == 0 and abs(target) != p:
                        continue
                else:
                    if a == 0 and not lo <= (-p if phi else p) <= hi:
                        continue
                    if phi == 0 and hi < p:
                        continue
                    if phi == 1 and lo > -p:
                        continue
                opts.append((a, s, phi))
    return opts


def build_ilp1(
    spec: FilterSpec | None,
    grid: FrequencyGrid | None,
    bounds: CoefficientBounds | None,
    n_adders: int,
    shift_range: tuple[int, int] | None = None,
    targets: Sequence[int] | None = None,
    wordlength: int | None = None,
) -> Ilp1Instance:
    """Formulation with a fixed number of multiplier-block adders.

    With ``targets`` the frequency constraints are dropped and the coefficients
    are pinned to the given integers (plain multiple constant multiplication).
    """
    if n_adders < 0:
        raise ValueError("adder count must be nonnegative")
    if targets is not None:
        targets = [int(t) for t in targets]
        B = wordlength if wordlength is not None else max(1, max((abs(t) for t in targets), default=1).bit_length())
        M = len(targets)
        lim = 1 << B
        bounds = CoefficientBounds(tuple(targets), tuple(targets))
        if any(abs(t) > lim for t in targets):
            raise ValueError(f"targets exceed the {B}-bit range")
    else:
        B = spec.wordlength
        M = spec.num_coefficients
    cmax = 1 << (B + 1)
    inst = Ilp1Instance(
        model=MilpModel(name=f"ilp1_AM{n_adders}"),
        n_adders=n_adders,
        num_coefficients=M,
        wordlength=B,
        shift_range=shift_range or default_shift_range(B),
        order=spec.order if spec is not None else None,
        ftype=spec.ftype if spec is not None else None,
    )
    model = inst.model
    if targets is None:
        inst.h, inst.hz, inst.gain = _coefficient_vars(model, spec, bounds, relax=False)
        add_frequency_constraints(model, spec, grid, inst.h, inst.gain)
    else:
        for m, t in enumerate(targets):
            inst.h.append(model.add_var(f"h_{m}", "integer", t, t))
            z = model.binary(f"hz_{m}")
            if t != 0:
                z.hi = 0.0
            inst.hz.append(z)
    inst.relaxable += inst.h
    _build_mb(inst, cmax)
    for m in range(M):
        h = inst.h[m]
        picks = []
        for a, s, phi in _output_options(inst, m, bounds.lo[m], bounds.hi[m], targets[m] if targets else None):
            o = model.binary(f"o_{a}_{m}_{s}_{phi}")
            inst.o[a, m, s, phi] = o
            picks.append(o)
            model.add_indicator(o, 1, h - (-1) ** phi * (2.0 ** s) * inst.c[a] == 0, name=f"C3a_{a}_{m}_{s}_{phi}")
        model.add_indicator(inst.hz[m], 1, h == 0, name=f"C3b_{m}")
        model.add(quicksum(picks) + inst.hz[m] == 1, name=f"C3c_{m}")
    if targets is None:
        model.minimize(_structural_objective(spec, inst.hz))
    else:
        model.minimize(LinExpr())
    return inst


def extract_from_ilp1(inst: Ilp1Instance, values) -> AdderGraph:
    """Adder graph encoded by a feasible assignment; simulated before returning."""
    values = np.asarray(values)
    nodes = [AdderNode(0, 1, 0)]
    stage = {0: 0}
    for a in range(1, inst.n_adders + 1):
        edges = {}
        for i in SIDES:
            srcs = [k for (aa, ii, k), v in inst.sel.items() if aa == a and ii == i and values[v.index] > 0.5]
            shifts = [s for (aa, ii, s), v in inst.varphi.items() if aa == a and ii == i and values[v.index] > 0.5]
            if len(srcs) != 1 or len(shifts) != 1:
                raise GraphError(f"adder {a} input {i}: ambiguous selection {srcs} / shifts {shifts}")
            edges[i] = Edge(int(srcs[0]), int(shifts[0]), bool(values[inst.sign[a, i].index] > 0.5))
        st = 1 + max(stage[edges["l"].src], stage[edges["r"].src])
        stage[a] = st
        nodes.append(AdderNode(a, int(round(values[inst.c[a].index])), st, edges["l"], edges["r"]))
    outputs = []
    for m in range(inst.num_coefficients):
        if values[inst.hz[m].index] > 0.5:
            outputs.append(Output(m, None))
            continue
        hits = [(a, s, phi) for (a, mm, s, phi), v in inst.o.items() if mm == m and values[v.index] > 0.5]
        if len(hits) != 1:
            raise GraphError(f"coefficient {m}: {len(hits)} output selections")
        a, s, phi = hits[0]
        outputs.append(Output(m, a, s, phi))
    graph = AdderGraph(nodes, outputs)
    graph.simulate()
    h = [int(round(values[v.index])) for v in inst.h]
    if graph.coefficients(inst.num_coefficients) != h:
        raise GraphError(f"graph realizes {graph.coefficients(inst.num_coefficients)}, model says {h}")
    return graph


@dataclass
class FixedAmResult:
    status: Status
    n_adders: int
    structural_adders: int | None = None
    coefficients: list | None = None
    gain: float | None = None
    graph: AdderGraph | None = None
    outcome: SolveOutcome | None = None

    @property
    def feasible(self) -> bool:
        return self.graph is not None


def _relax_set(inst: Ilp1Instance, relax_aux: bool):
    return frozenset(v.index for v in inst.relaxable) if relax_aux else frozenset()


def solve_fixed_am(inst: Ilp1Instance, options: SolveOptions | None = None, relax_aux: bool = True, spec: FilterSpec | None = None) -> FixedAmResult:
    opts = options or SolveOptions()
    opts = SolveOptions(**{**opts.__dict__, "relax_listed_integers": _relax_set(inst, relax_aux)})
    out = solve(inst.model, opts)
    if out.status is Status.INFEASIBLE:
        return FixedAmResult(Status.INFEASIBLE, inst.n_adders, outcome=out)
    if not out.has_solution:
        return FixedAmResult(out.status, inst.n_adders, outcome=out)
    graph = extract_from_ilp1(inst, out.values)
    h = graph.coefficients(inst.num_coefficients)
    a_s = None
    if inst.order is not None:
        a_s = structural_adder_count(inst.ftype, inst.order, [x == 0 for x in h])
    gain = out[inst.gain] if inst.gain is not None else (spec.gain.value if spec is not None else None)
    return FixedAmResult(out.status, inst.n_adders, a_s, h, gain, graph, out)


def min_structural_adders(spec: FilterSpec, grid: FrequencyGrid, bounds: CoefficientBounds, options: SolveOptions | None = None) -> tuple[int, SolveOutcome]:
    model, h, hz, gain = build_sparse_model(spec, grid, bounds)
    out = solve(model, options or SolveOptions())
    if out.status is Status.INFEASIBLE:
        raise IntegerInfeasible("no integer coefficient set satisfies the frequency constraints on the grid")
    if not out.ok:
        raise SolverTimeout("sparse lower-bound model did not finish")
    return int(round(out.objective)), out


def minimize_total_adders(
    spec: FilterSpec,
    grid: FrequencyGrid,
    bounds: CoefficientBounds,
    options: SolveOptions | None = None,
    relax_aux: bool = True,
    max_adders: int | None = None,
    shift_range: tuple[int, int] | None = None,
    keep_candidates: bool = False,
) -> DesignSolution:
    """Iterate the multiplier-block adder count until the total adder count is provably minimal."""
    opts = options or SolveOptions()
    t0 = time.perf_counter()
    as_min, _ = min_structural_adders(spec, grid, bounds, opts)
    log = [{"step": "sparse", "A_S_min": as_min}]
    best: FixedAmResult | None = None
    proven = False
    found_any = False
    limit = max_adders if max_adders is not None else 4 * spec.num_coefficients * spec.wordlength
    for am in range(0, limit + 1):
        inst = build_ilp1(spec, grid, bounds, am, shift_range)
        res = solve_fixed_am(inst, opts, relax_aux, spec)
        log.append({"step": "ilp1", "A_M": am, "status": res.status.value, "A_S": res.structural_adders,
                    "seconds": res.outcome.wall_time if res.outcome else None})
        logger.info("ILP1 A_M=%d: %s A_S=%s", am, res.status.value, res.structural_adders)
        if res.status is Status.TIMED_OUT and not res.feasible:
            if best is None:
                raise SolverTimeout(f"ILP1 timed out at A_M={am} without a solution")
            break
        if res.feasible:
            found_any = True
            total = am + res.structural_adders
            if best is None or total < best.n_adders + best.structural_adders:
                best = res
            if res.status is not Status.OPTIMAL:
                break
            if res.structural_adders <= as_min:
                proven = True
                break
        if best is not None and am + 1 + as_min >= best.n_adders + best.structural_adders:
            proven = all(e.get("status") in ("optimal", "infeasible") for e in log[1:])
            break
    if not found_any:
        raise IntegerInfeasible(f"no design with at most {limit} multiplier-block adders")
    sol = DesignSolution(
        spec=spec,
        coefficients=best.coefficients,
        gain=float(best.gain),
        graph=best.graph,
        multiplier_adders=best.n_adders,
        structural_adders=best.structural_adders,
        adder_depth=best.graph.depth,
        method="ilp1",
        optimality=Optimality.PROVEN_OPTIMAL if proven else Optimality.BEST_KNOWN,
        log=log,
    )
    sol.check()
    logger.info("ILP1 total: A=%d (A_M=%d, A_S=%d) in %.1fs", sol.total_adders, sol.multiplier_adders, sol.structural_adders, time.perf_counter() - t0)
    return sol


def mcm_min_adders(targets: Sequence[int], options: SolveOptions | None = None, relax_aux: bool = True, max_adders: int = 16) -> tuple[int, AdderGraph]:
    """Fewest adders realizing all ``targets`` (plain MCM)."""
    for am in range(max_adders + 1):
        inst = build_ilp1(None, None, None, am, targets=targets)
        res = solve_fixed_am(inst, options, relax_aux)
        if res.feasible:
            return am, res.graph
        if res.status is Status.TIMED_OUT:
            raise SolverTimeout(f"MCM solve timed out at {am} adders")
    raise IntegerInfeasible(f"no MCM solution with at most {max_adders} adders")
