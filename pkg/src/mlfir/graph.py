"""Shift-and-add multiplier block graphs and the design result record."""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .exceptions import GraphError
from .spec import FilterSpec, structural_adder_count, to_printed_order

FORMAT_VERSION = 1


@dataclass(frozen=True)
class Edge:
    """Adder input: ``(-1)**neg * 2**shift * value(src)``; negative shifts are right shifts."""

    src: int
    shift: int = 0
    neg: bool = False

    def to_dict(self) -> dict:
        return {"src": self.src, "shift": self.shift, "neg": self.neg}


@dataclass(frozen=True)
class AdderNode:
    id: int
    value: int
    stage: int
    left: Edge | None = None
    right: Edge | None = None

    @property
    def is_input(self) -> bool:
        return self.left is None


@dataclass(frozen=True)
class Output:
    """Coefficient tap ``h'_m = (-1)**sign * 2**shift * value(node)``; ``node=None`` means zero."""

    m: int
    node: int | None
    shift: int = 0
    sign: int = 0

    @property
    def is_zero(self) -> bool:
        return self.node is None


def _term(edge: Edge, value: int) -> Fraction:
    t = Fraction(value) * (Fraction(2) ** edge.shift)
    return -t if edge.neg else t


@dataclass
class AdderGraph:
    nodes: list[AdderNode] = field(default_factory=lambda: [AdderNode(0, 1, 0)])
    outputs: list[Output] = field(default_factory=list)
    # stage-wise (value, "adder"|"wire") occupancy for depth-limited designs
    occupancy: list[list[tuple[int, str]]] | None = None

    @property
    def adder_count(self) -> int:
        return sum(1 for n in self.nodes if not n.is_input)

    @property
    def depth(self) -> int:
        return max((n.stage for n in self.nodes), default=0)

    def node(self, node_id: int) -> AdderNode:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise GraphError(f"unknown node {node_id}")

    def simulate(self) -> dict[int, int]:
        """Evaluate every node exactly and check it against its stored value."""
        by_id = {}
        for n in self.nodes:
            if n.id in by_id:
                raise GraphError(f"duplicate node id {n.id}")
            by_id[n.id] = n
        values: dict[int, int] = {}
        state: dict[int, int] = {}  # 1 = visiting, 2 = done

        def visit(nid: int) -> int:
            if state.get(nid) == 2:
                return values[nid]
            if state.get(nid) == 1:
                raise GraphError(f"cycle through node {nid}")
            if nid not in by_id:
                raise GraphError(f"edge to unknown node {nid}")
            state[nid] = 1
            n = by_id[nid]
            if n.is_input:
                v = Fraction(1)
            else:
                if n.left.neg and n.right.neg:
                    raise GraphError(f"node {nid}: both inputs negated")
                a, b = visit(n.left.src), visit(n.right.src)
                if by_id[n.left.src].stage >= n.stage or by_id[n.right.src].stage >= n.stage:
                    raise GraphError(f"node {nid}: source stage not smaller than stage {n.stage}")
                v = abs(_term(n.left, a) + _term(n.right, b))
            if v.denominator != 1:
                raise GraphError(f"node {nid}: non-integer value {v}")
            if int(v) != n.value:
                raise GraphError(f"node {nid}: stored value {n.value} but evaluates to {v}")
            state[nid] = 2
            values[nid] = int(v)
            return values[nid]

        for n in self.nodes:
            visit(n.id)
        for o in self.outputs:
            if o.node is not None and o.node not in by_id:
                raise GraphError(f"output {o.m} references unknown node {o.node}")
        return values

    def coefficients(self, num_coefficients: int | None = None) -> list[int]:
        """Signed integer coefficients realized by the output taps, in ``m`` order."""
        values = {n.id: n.value for n in self.nodes}
        M = num_coefficients if num_coefficients is not None else (max((o.m for o in self.outputs), default=-1) + 1)
        h = [0] * M
        for o in self.outputs:
            if o.node is None:
                continue
            h[o.m] = (-1) ** o.sign * (values[o.node] << o.shift)
        return h

    def to_dict(self, verbose: bool = False) -> dict:
        nodes = []
        for n in self.nodes:
            d = {"id": n.id, "value": n.value, "stage": n.stage}
            if not n.is_input:
                d["left"] = n.left.to_dict()
                d["right"] = n.right.to_dict()
            nodes.append(d)
        outputs = [
            {"m": o.m, "node": o.node, "shift": o.shift, "sign": o.sign}
            for o in sorted(self.outputs, key=lambda o: o.m)
        ]
        d = {"format": FORMAT_VERSION, "nodes": nodes, "outputs": outputs}
        if verbose and self.occupancy is not None:
            d["occupancy"] = [[{"value": v, "kind": k} for v, k in stage] for stage in self.occupancy]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "AdderGraph":
        if d.get("format") != FORMAT_VERSION:
            raise GraphError(f"unsupported graph format {d.get('format')!r}")
        nodes = []
        for nd in d["nodes"]:
            left = Edge(**nd["left"]) if "left" in nd else None
            right = Edge(**nd["right"]) if "right" in nd else None
            nodes.append(AdderNode(nd["id"], nd["value"], nd["stage"], left, right))
        outputs = [Output(o["m"], o["node"], o["shift"], o["sign"]) for o in d["outputs"]]
        occ = d.get("occupancy")
        if occ is not None:
            occ = [[(e["value"], e["kind"]) for e in stage] for stage in occ]
        return cls(nodes, outputs, occ)

    def to_json(self, verbose: bool = False) -> str:
        return json.dumps(self.to_dict(verbose), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "AdderGraph":
        return cls.from_dict(json.loads(text))

    def to_dot(self, name: str = "mb") -> str:
        lines = [f"digraph {name} {{", "  rankdir=LR;"]
        for n in self.nodes:
            shape = "circle" if n.is_input else "ellipse"
            lines.append(f'  n{n.id} [label="{n.value}", shape={shape}];')
        for n in self.nodes:
            if n.is_input:
                continue
            for e in (n.left, n.right):
                labels = []
                if e.shift > 0:
                    labels.append(f"<<{e.shift}")
                elif e.shift < 0:
                    labels.append(f">>{-e.shift}")
                if e.neg:
                    labels.append("−")
                label = f' [label="{" ".join(labels)}"]' if labels else ""
                lines.append(f"  n{e.src} -> n{n.id}{label};")
        for o in sorted(self.outputs, key=lambda o: o.m):
            if o.node is None:
                continue
            sign = "-" if o.sign else ""
            lines.append(f'  h{o.m} [label="h{o.m} = {sign}{self.node(o.node).value << o.shift}", shape=box];')
            label = f' [label="<<{o.shift}"]' if o.shift else ""
            lines.append(f"  n{o.node} -> h{o.m}{label};")
        lines.append("}")
        return "\n".join(lines) + "\n"


class GraphFormat(enum.Enum):
    JSON = "json"
    DOT = "dot"


def emit(graph: AdderGraph, fmt: GraphFormat | str = GraphFormat.JSON, verbose: bool = False) -> str:
    graph.simulate()
    fmt = GraphFormat(fmt)
    return graph.to_json(verbose) if fmt is GraphFormat.JSON else graph.to_dot()


def parse(text: str) -> AdderGraph:
    return AdderGraph.from_json(text)


def graph_from_chain(steps: Sequence[tuple[tuple[int, int, bool], tuple[int, int, bool]]]) -> AdderGraph:
    """Build a graph from ``((src, shift, neg), (src, shift, neg))`` pairs, node ids 1, 2, ...

    Stages and values are computed; handy for hand-written examples.
    """
    g = AdderGraph()
    for i, (l, r) in enumerate(steps, start=1):
        le, re_ = Edge(*l), Edge(*r)
        vl, vr = g.node(le.src).value, g.node(re_.src).value
        v = abs(_term(le, vl) + _term(re_, vr))
        if v.denominator != 1:
            raise GraphError(f"step {i} yields non-integer {v}")
        stage = 1 + max(g.node(le.src).stage, g.node(re_.src).stage)
        g.nodes.append(AdderNode(i, int(v), stage, le, re_))
    return g


class Optimality(enum.Enum):
    PROVEN_OPTIMAL = "proven_optimal"
    BEST_KNOWN = "best_known"


@dataclass
class DesignSolution:
    spec: FilterSpec
    coefficients: list[int]
    gain: float
    graph: AdderGraph
    multiplier_adders: int
    structural_adders: int
    adder_depth: int
    method: str
    optimality: Optimality = Optimality.PROVEN_OPTIMAL
    violation: float | None = None
    log: list[dict] = field(default_factory=list)

    @property
    def total_adders(self) -> int:
        return self.multiplier_adders + self.structural_adders

    @property
    def zero_flags(self) -> list[bool]:
        return [c == 0 for c in self.coefficients]

    def check(self) -> None:
        """Recheck the invariants tying counts, coefficients and graph together."""
        self.graph.simulate()
        if self.graph.coefficients(len(self.coefficients)) != list(self.coefficients):
            raise GraphError("graph outputs do not reproduce the coefficients")
        a_s = structural_adder_count(self.spec.ftype, self.spec.order, self.zero_flags)
        if a_s != self.structural_adders:
            raise GraphError(f"structural adder count {self.structural_adders} != recomputed {a_s}")
        if self.graph.adder_count != self.multiplier_adders:
            raise GraphError(f"graph has {self.graph.adder_count} adders, record says {self.multiplier_adders}")

    def to_dict(self, verbose: bool = False) -> dict:
        d = {
            "format": FORMAT_VERSION,
            "spec": self.spec.to_dict(),
            "method": self.method,
            "coefficients": list(map(int, self.coefficients)),
            "coefficients_printed": to_printed_order(self.coefficients),
            "gain": self.gain,
            "A_M": self.multiplier_adders,
            "A_S": self.structural_adders,
            "A": self.total_adders,
            "AD": self.adder_depth,
            "violation": self.violation,
            "optimality": self.optimality.value,
            "graph": self.graph.to_dict(verbose),
        }
        if verbose:
            d["log"] = self.log
        return d
