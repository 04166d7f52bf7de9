"""Depth-bounded formulation over precomputed stage sets: minimize the total
adder count with at most ``S`` adder stages in the multiplier block.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .aop import StageSets, build_stage_sets, first_config, max_adder_depth, odd_part
from .bounds import CoefficientBounds
from .exceptions import DepthInfeasible, GraphError, IntegerInfeasible, SolverTimeout
from .graph import AdderGraph, AdderNode, DesignSolution, Edge, Optimality, Output
from .grid import FrequencyGrid
from .ilp1 import _structural_objective, add_frequency_constraints
from .milp import LinExpr, MilpModel, SolveOptions, SolveOutcome, Status, quicksum, solve
from .spec import FilterSpec, structural_adder_count

logger = logging.getLogger(__name__)


@dataclass
class Ilp2Instance:
    model: MilpModel
    stages: int
    sets: StageSets
    num_coefficients: int
    order: int | None = None
    ftype: object = None
    h: list = field(default_factory=list)
    hw: dict = field(default_factory=dict)  # (m, w)
    phi: list = field(default_factory=list)
    gain: object = None
    a: dict = field(default_factory=dict)  # (s, w)
    r: dict = field(default_factory=dict)  # (s, w)
    x: dict = field(default_factory=dict)  # (s, u, v)
    relaxable: list = field(default_factory=list)


def _magnitudes(lo: int, hi: int) -> list[int]:
    top = max(abs(lo), abs(hi))
    return [w for w in range(top + 1) if lo <= w <= hi or lo <= -w <= hi]


def build_ilp2(
    spec: FilterSpec | None,
    grid: FrequencyGrid | None,
    bounds: CoefficientBounds | None,
    stages: int,
    sets: StageSets | None = None,
    targets: Sequence[int] | None = None,
    wordlength: int | None = None,
) -> Ilp2Instance:
    """Depth-``stages`` model; ``targets`` pins the coefficients (MCM mode, no frequency rows)."""
    if stages < 0:
        raise ValueError("stage count must be nonnegative")
    if targets is not None:
        targets = [int(t) for t in targets]
        B = wordlength if wordlength is not None else max(1, max((abs(t) for t in targets), default=1).bit_length())
        bounds = CoefficientBounds(tuple(targets), tuple(targets))
        M = len(targets)
    else:
        B, M = spec.wordlength, spec.num_coefficients
    if sets is None:
        sets = build_stage_sets(B, stages)
    if sets.stages < stages:
        raise ValueError(f"stage sets cover {sets.stages} stages, {stages} requested")
    S = stages
    inst = Ilp2Instance(
        model=MilpModel(name=f"ilp2_S{S}"),
        stages=S,
        sets=sets,
        num_coefficients=M,
        order=spec.order if spec is not None else None,
        ftype=spec.ftype if spec is not None else None,
    )
    model = inst.model

    # coefficient magnitudes and signs
    wanted: dict[int, list] = {}  # odd part -> [h_{m,w}]
    for m in range(M):
        lo, hi = bounds.lo[m], bounds.hi[m]
        h = model.add_var(f"h_{m}", "integer", lo, hi)
        phi = model.binary(f"phi_{m}")
        if lo >= 0:
            phi.hi = 0.0
        elif hi < 0:
            phi.lo = 1.0
        inst.h.append(h)
        inst.phi.append(phi)
        pos, neg = LinExpr(), LinExpr()
        picks = []
        for w in _magnitudes(lo, hi):
            hw = model.binary(f"hw_{m}_{w}")
            inst.hw[m, w] = hw
            picks.append(hw)
            pos.iadd(hw, float(w))
            if w:
                neg.iadd(hw, -float(w))
                wanted.setdefault(odd_part(w), []).append(hw)
                if not w <= hi:
                    model.add(hw - phi <= 0, name=f"sgn_{m}_{w}")
                if not lo <= -w:
                    model.add(hw + phi <= 1, name=f"sgn_{m}_{w}")
        if not picks:
            raise IntegerInfeasible(f"coefficient {m} has no admissible magnitude")
        model.add_indicator(phi, 0, h - pos == 0, name=f"C3a_p_{m}")
        model.add_indicator(phi, 1, h - neg == 0, name=f"C3a_n_{m}")
        model.add(quicksum(picks) == 1, name=f"C3b_{m}")
    inst.relaxable += inst.h
    if targets is None:
        gain = None
        if spec.gain.variable:
            gain = model.continuous("G", *spec.gain.bounds)
        inst.gain = gain
        add_frequency_constraints(model, spec, grid, inst.h, gain)

    # stage variables; the input (value 1) is always available at stage 0
    values = sets.values
    seen = {1}
    needed_last = set(wanted)
    for s in range(1, S + 1):
        last = s == S
        for w in values[s]:
            if w == 1 or (last and w not in needed_last):
                continue
            inst.a[s, w] = model.binary(f"a_{s}_{w}")
        for w in sorted(seen):
            if last and w not in needed_last:
                continue
            inst.r[s, w] = model.binary(f"r_{s}_{w}")
        seen.update(values[s])
    for s in range(1, S + 1):
        for (ss, w), r in inst.r.items():
            if ss != s:
                continue
            if s == 1:
                continue  # only w = 1 here, fed by the input
            prev = [v for v in (inst.a.get((s - 1, w)), inst.r.get((s - 1, w))) if v is not None]
            model.add(r - quicksum(prev) <= 0, name=f"C6_{s}_{w}")

    def avail(s, w):
        return [v for v in (inst.a.get((s, w)), inst.r.get((s, w))) if v is not None]

    # pair availability and adder inputs
    for s in range(2, S + 1):
        by_w = sets.by_output(s)
        for w, pairs in by_w.items():
            aw = inst.a.get((s, w))
            if aw is None:
                continue
            xs = []
            for u, v in pairs:
                key = (s - 1, u, v)
                if key not in inst.x:
                    au, av = avail(s - 1, u), avail(s - 1, v)
                    if not au or not av:
                        continue
                    x = model.binary(f"x_{s - 1}_{u}_{v}")
                    inst.x[key] = x
                    inst.relaxable.append(x)
                    model.add(x - quicksum(au) <= 0, name=f"C8u_{s - 1}_{u}_{v}")
                    if v != u:
                        model.add(x - quicksum(av) <= 0, name=f"C8v_{s - 1}_{u}_{v}")
                xs.append(inst.x[key])
            if not xs:
                aw.hi = 0.0
            else:
                model.add(aw - quicksum(xs) <= 0, name=f"C7_{s}_{w}")

    # every used odd magnitude must be present at the output stage
    for w, hws in sorted(wanted.items()):
        if w == 1 and S == 0:
            continue
        cover = avail(S, w) if S > 0 else []
        if S == 0 and w != 1:
            for hw in hws:
                hw.hi = 0.0
            continue
        if not cover:
            for hw in hws:
                hw.hi = 0.0
            continue
        model.add(quicksum(cover) - (1.0 / M) * quicksum(hws) >= 0, name=f"C4_{w}")

    obj = quicksum(inst.a.values())
    if targets is None:
        obj = obj + _structural_objective(spec, [inst.hw[m, 0] if (m, 0) in inst.hw else _zero_var(model, m) for m in range(M)])
    model.minimize(obj)
    return inst


def _zero_var(model: MilpModel, m: int):
    v = model.binary(f"hw_{m}_0_fixed")
    v.hi = 0.0
    return v


def extract_from_ilp2(inst: Ilp2Instance, values) -> AdderGraph:
    """Adder graph for an assignment; dead adders are dropped and stages recomputed."""
    values = np.asarray(values)
    S = inst.stages
    c_max = inst.sets.c_max
    on = lambda var: var is not None and values[var.index] > 0.5
    nodes = [AdderNode(0, 1, 0)]
    occupancy = []
    at = {1: 0}  # value -> node id of its latest realization
    for s in range(1, S + 1):
        prev = dict(at)
        avail_prev = set(prev)
        stage_occ = []
        cur = {}
        for w in sorted({w for (ss, w) in inst.r if ss == s}):
            if on(inst.r[s, w]):
                if w not in prev:
                    raise GraphError(f"stage {s}: {w} replicated but not available")
                cur[w] = prev[w]
                stage_occ.append((w, "wire"))
        for w in sorted({w for (ss, w) in inst.a if ss == s}):
            if not on(inst.a[s, w]):
                continue
            pairs = sorted(p for p in inst.sets.by_output(s).get(w, []) if p[0] in avail_prev and p[1] in avail_prev)
            if not pairs:
                raise GraphError(f"stage {s}: no available inputs for adder {w}")
            u, v = pairs[0]
            q = first_config(u, v, w, c_max)
            nid = len(nodes)
            left = Edge(prev[u], q.lu - q.r, False)
            right = Edge(prev[v], q.lv - q.r, bool(q.sv))
            nodes.append(AdderNode(nid, w, s, left, right))
            cur[w] = nid
            stage_occ.append((w, "adder"))
        at = {1: 0, **cur}
        occupancy.append(sorted(stage_occ))
    outputs = []
    M = inst.num_coefficients
    for m in range(M):
        h = int(round(values[inst.h[m].index]))
        if h == 0:
            outputs.append(Output(m, None))
            continue
        w = odd_part(abs(h))
        shift = (abs(h) // w).bit_length() - 1
        src = at.get(w)
        if src is None:
            raise GraphError(f"coefficient {m} = {h}: odd part {w} not available at the output stage")
        outputs.append(Output(m, src, shift, int(h < 0)))
    graph = _prune(AdderGraph(nodes, outputs, occupancy))
    graph.simulate()
    return graph


def _prune(graph: AdderGraph) -> AdderGraph:
    """Drop adders not feeding an output, renumber, and set stages to the logical depth."""
    by_id = {n.id: n for n in graph.nodes}
    live = {0}
    stack = [o.node for o in graph.outputs if o.node is not None]
    while stack:
        nid = stack.pop()
        if nid in live:
            continue
        live.add(nid)
        n = by_id[nid]
        if not n.is_input:
            stack += [n.left.src, n.right.src]
    keep = [n for n in graph.nodes if n.id in live]
    remap = {n.id: i for i, n in enumerate(keep)}
    depth = {}
    nodes = []
    for n in keep:
        if n.is_input:
            depth[remap[n.id]] = 0
            nodes.append(AdderNode(0, n.value, 0))
            continue
        l = Edge(remap[n.left.src], n.left.shift, n.left.neg)
        r = Edge(remap[n.right.src], n.right.shift, n.right.neg)
        st = 1 + max(depth[l.src], depth[r.src])
        depth[remap[n.id]] = st
        nodes.append(AdderNode(remap[n.id], n.value, st, l, r))
    outputs = [Output(o.m, remap[o.node] if o.node is not None else None, o.shift, o.sign) for o in graph.outputs]
    return AdderGraph(nodes, outputs, graph.occupancy)


def _relax_set(inst: Ilp2Instance, relax: bool):
    return frozenset(v.index for v in inst.relaxable) if relax else frozenset()


@dataclass
class BoundedAdResult:
    status: Status
    stages: int
    coefficients: list | None = None
    gain: float | None = None
    graph: AdderGraph | None = None
    structural_adders: int | None = None
    outcome: SolveOutcome | None = None

    @property
    def feasible(self) -> bool:
        return self.graph is not None


def solve_ilp2(inst: Ilp2Instance, options: SolveOptions | None = None, relax: bool = True, spec: FilterSpec | None = None) -> BoundedAdResult:
    opts = options or SolveOptions()
    opts = SolveOptions(**{**opts.__dict__, "relax_listed_integers": _relax_set(inst, relax)})
    out = solve(inst.model, opts)
    if not out.has_solution:
        return BoundedAdResult(out.status, inst.stages, outcome=out)
    graph = extract_from_ilp2(inst, out.values)
    h = graph.coefficients(inst.num_coefficients)
    a_s = None
    if inst.order is not None:
        a_s = structural_adder_count(inst.ftype, inst.order, [x == 0 for x in h])
    gain = out[inst.gain] if inst.gain is not None else (spec.gain.value if spec is not None else None)
    return BoundedAdResult(out.status, inst.stages, h, gain, graph, a_s, out)


def solve_bounded_ad(
    spec: FilterSpec,
    grid: FrequencyGrid,
    bounds: CoefficientBounds,
    ad_limit: int | str = "auto",
    options: SolveOptions | None = None,
    relax: bool = True,
) -> DesignSolution:
    """Minimum total adders with the multiplier-block depth bounded by ``ad_limit``.

    ``"auto"`` tries 1, 2, ... up to the word-length bound and keeps the first
    depth with a feasible design.
    """
    opts = options or SolveOptions()
    if ad_limit == "auto":
        depths = list(range(1, max_adder_depth(spec.wordlength) + 1))
    else:
        depths = [int(ad_limit)]
    log = []
    t0 = time.perf_counter()
    for S in depths:
        inst = build_ilp2(spec, grid, bounds, S)
        res = solve_ilp2(inst, opts, relax, spec)
        log.append({"step": "ilp2", "S": S, "status": res.status.value,
                    "seconds": res.outcome.wall_time if res.outcome else None})
        logger.info("ILP2 S=%d: %s", S, res.status.value)
        if res.feasible:
            sol = DesignSolution(
                spec=spec,
                coefficients=res.coefficients,
                gain=float(res.gain),
                graph=res.graph,
                multiplier_adders=res.graph.adder_count,
                structural_adders=res.structural_adders,
                adder_depth=res.graph.depth,
                method="ilp2",
                optimality=Optimality.PROVEN_OPTIMAL if res.status is Status.OPTIMAL else Optimality.BEST_KNOWN,
                log=log,
            )
            sol.check()
            logger.info("ILP2 total: A=%d (A_M=%d, A_S=%d, AD=%d) in %.1fs", sol.total_adders,
                        sol.multiplier_adders, sol.structural_adders, sol.adder_depth, time.perf_counter() - t0)
            return sol
        if res.status is Status.TIMED_OUT:
            raise SolverTimeout(f"ILP2 timed out at depth {S} without a solution")
    raise DepthInfeasible(f"no design within adder depth {depths[-1]}")


def scm_min_adders(target: int, stages: int, options: SolveOptions | None = None, wordlength: int | None = None) -> tuple[int, AdderGraph]:
    """Fewest adders for a single constant with at most ``stages`` adder stages."""
    inst = build_ilp2(None, None, None, stages, targets=[target], wordlength=wordlength)
    res = solve_ilp2(inst, options)
    if not res.feasible:
        if res.status is Status.TIMED_OUT:
            raise SolverTimeout("SCM solve timed out")
        raise DepthInfeasible(f"{target} is not reachable within {stages} stages")
    return res.graph.adder_count, res.graph
