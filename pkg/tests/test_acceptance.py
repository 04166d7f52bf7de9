"""Acceptance criteria; each test prints one PASS/FAIL line per criterion check."""
import itertools
import json
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from mlfir.aop import build_stage_sets
from mlfir.benchmarks import PUBLISHED_DESIGNS, benchmark_spec
from mlfir.bounds import tighten
from mlfir.cli import main as cli_main
from mlfir.graph import AdderGraph
from mlfir.grid import afp_grid, design_grid, refine
from mlfir.milp import Constraint, MilpModel, Sense, SolveOptions, linearize_indicators, quicksum
from mlfir.spec import redmill_spec
from mlfir.validate import design, minimal_order, validate

sys.path.insert(0, str(Path(__file__).parent))
from oracles import one_op  # noqa: E402

SOLVED: list = []  # (label, DesignSolution or AdderGraph with expected coefficients)


@pytest.fixture
def report(capsys):
    def emit(ok: bool, text: str):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} {text}", flush=True)
    return emit


def _cli_json(capsys, argv):
    t0 = time.perf_counter()
    code = cli_main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out), time.perf_counter() - t0


# 1. multiple constant multiplication

@pytest.mark.parametrize("consts,adders", [(["23"], 2), (["7", "23"], 2), (["3"], 1), (["1"], 0)],
                         ids=["23", "7_23", "3", "1"])
def test_c1_mcm(capsys, report, consts, adders):
    code, d, dt = _cli_json(capsys, ["mcm", *consts])
    g = AdderGraph.from_dict(d["graph"])
    SOLVED.append((f"mcm {' '.join(consts)}", g, [int(c) for c in consts]))
    ok = code == 0 and d["adders"] == adders and dt < 60
    report(ok, f"C1 mcm {' '.join(consts)}: {d['adders']} adders (expected {adders}) in {dt:.2f}s")
    assert ok


# 2. stage sets against brute force

def test_c2_stage_sets(report):
    t0 = time.perf_counter()
    checks = []
    for B in (2, 3, 4):
        sets = build_stage_sets(B, 1, use_cache=False)
        A1 = one_op(1, 1, 2 ** (B + 1))
        checks.append((f"A^1(B={B})", set(sets.values[1]) == A1))
        checks.append((f"T^1(B={B})", list(sets.triplets[1]) == sorted((1, 1, w) for w in A1)))
    checks.append(("A^1(B=3)", build_stage_sets(3, 1, use_cache=False).values[1] == (1, 3, 5, 7, 9, 15)))
    t2 = set(build_stage_sets(8, 2, use_cache=False).triplets[2])
    checks.append(("T^2 triplets", {(1, 3, 11), (1, 5, 11), (3, 5, 11)} <= t2))
    dt = time.perf_counter() - t0
    ok = all(c for _, c in checks) and dt < 10
    failed = [n for n, c in checks if not c]
    report(ok, f"C2 stage sets: {len(checks) - len(failed)}/{len(checks)} checks in {dt:.2f}s {failed or ''}")
    assert ok


# 3. validation of published rows

EXACT_OURS = [d for d in PUBLISHED_DESIGNS if d.origin == "ilp" and d.error == 0]


@pytest.mark.parametrize("row", EXACT_OURS, ids=lambda d: d.label)
def test_c3_exact_rows(report, row):
    v = validate(row.h, row.gain, row.spec()).max_violation
    report(v == 0, f"C3 validate {row.label}: violation {v:.3g} (expected 0)")
    assert v == 0


def _row(name, origin):
    return [d for d in PUBLISHED_DESIGNS if d.name == name and d.origin == origin][0]


def test_c3_s1c_reference(report):
    d = _row("S1c", "sy11a")
    v = validate(d.h, d.gain, d.spec()).max_violation
    ok = abs(v - 0.00118) <= 0.1 * 0.00118
    report(ok, f"C3 validate {d.label}: violation {v:.5f} (expected 0.00118 +-10%)")
    assert ok


def test_c3_s2b_reference(report):
    d = _row("S2b", "sy11a")
    v = validate(d.h, d.gain, d.spec()).max_violation
    report(v >= 0.0139, f"C3 validate {d.label}: violation {v:.5f} (expected >= 0.0139)")
    assert v >= 0.0139


# 4. end-to-end designs

E2E = {
    "S1c-I-N24-B8-AD2": (("S1c", 24, "I", 8, 0.0), 2, 25),
    "S1a-II-N23-B8-err0.00159": (("S1a", 23, "II", 8, 0.00159), 2, 24),
    "L3-II-N35-B8-AD2": (("L3", 35, "II", 8, 0.0), 2, 35),
    "L3-II-N35-B8-err0.00213-AD1": (("L3", 35, "II", 8, 0.00213), 1, 34),
}


@pytest.mark.parametrize("key", list(E2E))
def test_c4_end_to_end(report, key):
    (name, N, t, B, err), ad, expected = E2E[key]
    spec = benchmark_spec(name, N, t, B, allow_error=err)
    t0 = time.perf_counter()
    run = design(spec, "ilp2", ad, SolveOptions(time_limit=7200))
    dt = time.perf_counter() - t0
    sol = run.solution
    SOLVED.append((key, sol, None))
    limit = err + 1e-9
    ok = sol.total_adders == expected and run.report.max_violation <= limit and dt <= 7200
    report(ok, f"C4 design {key}: A={sol.total_adders} (A_M={sol.multiplier_adders}, A_S={sol.structural_adders}, "
               f"AD={sol.adder_depth}) expected {expected}; violation {run.report.max_violation:.3g}; "
               f"{sol.optimality.value}; {dt:.0f}s")
    assert ok


# 5. ILP1 against ILP2 on the Redmill family

REDMILL: dict = {}


@pytest.mark.parametrize("p", range(2, 15))
def test_c5_redmill_point(report, p):
    opts = SolveOptions(time_limit=1800)
    make = lambda n: redmill_spec(p, n, 9)
    N = minimal_order(make, options=opts)
    spec = make(N)
    r1 = design(spec, "ilp1", options=opts)
    r2 = design(spec, "ilp2", 2, opts)
    SOLVED.extend([(f"redmill-{p} ilp1", r1.solution, None), (f"redmill-{p} ilp2", r2.solution, None)])
    a1, a2 = r1.solution.total_adders, r2.solution.total_adders
    REDMILL[p] = (a1, a2)
    ok = r1.report.valid and r2.report.valid and a1 <= a2
    report(ok, f"C5 redmill p={p} N={N}: ILP1 A={a1}, ILP2(AD=2) A={a2}, both valid={r1.report.valid and r2.report.valid}")
    assert ok


def test_c5_redmill_majority_equal(report):
    if len(REDMILL) < 13:
        pytest.skip("needs every Redmill point from this session")
    eq = sum(a == b for a, b in REDMILL.values())
    ok = eq > len(REDMILL) / 2
    report(ok, f"C5 redmill equality at {eq}/{len(REDMILL)} points (majority required)")
    assert ok


# 6. property suite

def test_c6_simulate_extract(report):
    if not SOLVED:
        for p in (8, 10, 12):
            s = redmill_spec(p, 4, 9)
            SOLVED.append((f"redmill-{p}", design(s, ad=2).solution, None))
    bad = []
    for label, obj, expected in SOLVED:
        try:
            if isinstance(obj, AdderGraph):
                obj.simulate()
                assert obj.coefficients(len(expected)) == expected
            else:
                obj.check()
                assert obj.graph.adder_count == obj.multiplier_adders
        except Exception as exc:  # noqa: BLE001
            bad.append(f"{label}: {exc}")
    report(not bad, f"C6 simulate∘extract on {len(SOLVED)} solved instances {bad or ''}")
    assert not bad


def _in_default_interval(d):
    lo, hi = benchmark_spec(d.name, d.order, d.ftype, d.wordlength).gain.bounds
    return lo <= d.gain <= hi


def test_c6_bounds_soundness(report):
    ours = [d for d in PUBLISHED_DESIGNS if d.origin == "ilp"]
    bad = []
    checked = 0
    for d in ours:
        # fixed at the published gain; allow_error rows are checked against the widened spec
        spec = d.spec().with_(allow_error=d.error).widened()
        if not tighten(spec, design_grid(spec)).contains(d.h):
            bad.append(d.label + " fixed")
        checked += 1
        if _in_default_interval(d):
            vspec = benchmark_spec(d.name, d.order, d.ftype, d.wordlength, allow_error=d.error).widened()
            if not tighten(vspec, design_grid(vspec)).contains(d.h):
                bad.append(d.label + " variable")
            checked += 1
    report(not bad, f"C6 bounds soundness: {checked - len(bad)}/{checked} boxes contain the published coefficients {bad or ''}")
    assert not bad


def test_c6_monotonicity(report):
    spec = benchmark_spec("S1c", 24, "I", 8)
    grid = design_grid(spec)
    b = tighten(spec, grid)
    rng = np.random.default_rng(0)
    ok = True
    for _ in range(4):
        new = refine(grid, [(float(x), None) for x in rng.choice(np.r_[np.linspace(0, 0.3, 50), np.linspace(0.5, 1, 80)], 6)])
        nb = tighten(spec, new)
        ok &= set(grid.x.tolist()) <= set(new.x.tolist())
        ok &= all(x >= y for x, y in zip(nb.lo, b.lo)) and all(x <= y for x, y in zip(nb.hi, b.hi))
        grid, b = new, nb
    report(ok, "C6 grid growth and bound tightening under refinement")
    assert ok


def test_c6_linearization_exhaustive(report):
    rng = np.random.default_rng(7)
    mismatches = 0
    points = 0
    for trial in range(5):
        m = MilpModel(f"t{trial}")
        bins = [m.binary(f"b{i}") for i in range(10)]
        ints = [m.integer(f"x{i}", -2, 2) for i in range(2)]
        for j in range(6):
            g = bins[j]
            coefs = rng.integers(-2, 3, size=4)
            lhs = quicksum(int(a) * v for a, v in zip(coefs, bins[6:] + ints))
            m.add_indicator(g, int(rng.integers(2)), Constraint.make(lhs, [Sense.LE, Sense.GE, Sense.EQ][j % 3], int(rng.integers(-1, 2))))
        lin = linearize_indicators(m)
        ranges = [range(int(v.lo), int(v.hi) + 1) for v in m.variables]
        for x in itertools.product(*ranges):
            x = np.array(x, dtype=float)
            points += 1
            mismatches += m.is_feasible(x) != lin.is_feasible(x)
    report(mismatches == 0, f"C6 indicator linearization: {points} assignments (10 binaries, 2 integers per model), {mismatches} mismatches")
    assert mismatches == 0


def test_c6_determinism(report):
    spec = benchmark_spec("S1c", 24, "I", 8)
    g1, g2 = afp_grid(spec, 52, 16), afp_grid(spec, 52, 16)
    same_grid = g1.x.tobytes() == g2.x.tobytes() and g1 == g2
    s = redmill_spec(12, 4, 9)
    d1, d2 = design(s, ad=2), design(s, ad=2)
    same_design = json.dumps(d1.solution.to_dict()) == json.dumps(d2.solution.to_dict())
    ok = same_grid and same_design
    report(ok, f"C6 determinism: afp_grid identical={same_grid}, design identical={same_design}")
    assert ok


# 7. validation-only benchmarks

def test_c7_validation_only(report):
    rows = [d for d in PUBLISHED_DESIGNS if d.name in ("S2a", "S2b", "L2")]
    results = []
    for d in rows:
        v = validate(d.h, d.gain, d.spec()).max_violation
        results.append(v == 0 if d.error == 0 else v > 0)
    l1 = benchmark_spec("L1", 40, "I", 10)
    passband = [b for b in l1.bands if b.lower > 0][0]
    ok = all(results) and len(rows) > 0 and float(passband.lo) == 0.8 and math.isclose(passband.lower, 1 - 0.0057)
    report(ok, f"C7 validation-only rows S2a/S2b/L2: {sum(results)}/{len(rows)} consistent with their published error; "
               "L1 and the long optimality proofs are not redesigned")
    assert ok
