import sys
from pathlib import Path

import pytest

from mlfir.aop import a_star
from mlfir.bounds import tighten
from mlfir.exceptions import DepthInfeasible
from mlfir.grid import design_grid
from mlfir.ilp1 import minimize_total_adders
from mlfir.ilp2 import build_ilp2, extract_from_ilp2, scm_min_adders, solve_bounded_ad, solve_ilp2
from mlfir.milp import SolveOptions, solve
from mlfir.spec import redmill_spec

sys.path.insert(0, str(Path(__file__).parent))
from oracles import scm_cost  # noqa: E402


def ilp2_scm(t, S, B):
    try:
        return scm_min_adders(t, S, wordlength=B)[0]
    except DepthInfeasible:
        return None


@pytest.mark.parametrize("B", [4, 5])
@pytest.mark.parametrize("S", [1, 2, 3])
def test_scm_matches_exhaustive_search(B, S):
    for t in range(1, 2**B, 2):
        assert ilp2_scm(t, S, B) == scm_cost(t, S, 2 ** (B + 1)), t


def test_scm_even_and_negative_targets():
    assert scm_min_adders(46, 2, wordlength=6)[0] == 2
    assert scm_min_adders(-23, 2, wordlength=5)[0] == 2
    assert scm_min_adders(64, 1, wordlength=6)[0] == 0


def test_depth_sensitive_constant():
    assert ilp2_scm(171, 2, 8) is None
    assert scm_cost(171, 2, 512) is None
    n, g = scm_min_adders(171, 3, wordlength=8)
    assert n == 3 == scm_cost(171, 3, 512)
    assert g.depth == 3


def test_scm_23_depth_two():
    n, g = scm_min_adders(23, 2, wordlength=5)
    assert n == 2 and g.depth == 2 and 23 in g.simulate().values()
    assert ilp2_scm(23, 1, 5) is None


def test_mcm_mode():
    inst = build_ilp2(None, None, None, 2, targets=[7, 23], wordlength=5)
    res = solve_ilp2(inst)
    assert res.graph.adder_count == 2 and res.coefficients == [7, 23]


def realized_inputs_check(inst, values):
    """Each realized adder has a triplet whose inputs exist at the previous stage."""
    on = lambda v: v is not None and values[v.index] > 0.5
    present = {0: {1}}
    for s in range(1, inst.stages + 1):
        present[s] = {1} | {w for (ss, w), v in inst.a.items() if ss == s and on(v)} | {
            w for (ss, w), v in inst.r.items() if ss == s and on(v)}
        for (ss, w), v in inst.a.items():
            if ss != s or not on(v):
                continue
            prev = sorted(present[s - 1])
            assert any(w in a_star(u, x, inst.sets.c_max) for i, u in enumerate(prev) for x in prev[i:]), (s, w)
        for (ss, w), v in inst.r.items():
            if ss == s and on(v):
                assert w in present[s - 1]


@pytest.mark.parametrize("p,order", [(10, 2), (12, 4), (13, 6)])
def test_assignment_triplets_and_extraction(p, order):
    spec = redmill_spec(p, order, 9)
    grid = design_grid(spec)
    inst = build_ilp2(spec, grid, tighten(spec, grid), 2)
    out = solve(inst.model, SolveOptions(relax_listed_integers=frozenset(v.index for v in inst.relaxable)))
    assert out.has_solution
    realized_inputs_check(inst, out.values)
    g = extract_from_ilp2(inst, out.values)
    g.simulate()
    assert g.depth <= 2
    assert g.coefficients(spec.num_coefficients) == [int(round(out[v])) for v in inst.h]


def test_zero_filter_objective_zero():
    spec = redmill_spec(2, 2, 9)
    grid = design_grid(spec)
    sol = solve_bounded_ad(spec, grid, tighten(spec, grid), 2)
    assert sol.multiplier_adders == 0 and sol.graph.adder_count == 0


def test_depth_zero_infeasible_for_nontrivial_magnitude():
    spec = redmill_spec(10, 2, 9)
    grid = design_grid(spec)
    with pytest.raises(DepthInfeasible):
        solve_bounded_ad(spec, grid, tighten(spec, grid), 0)


def test_depth_dominance_and_auto():
    spec = redmill_spec(13, 6, 6)
    grid = design_grid(spec)
    bounds = tighten(spec, grid)
    totals = [solve_bounded_ad(spec, grid, bounds, S).total_adders for S in (1, 2, 3)]
    assert totals[0] >= totals[1] >= totals[2]
    auto = solve_bounded_ad(spec, grid, bounds, "auto")
    assert auto.total_adders == totals[0] and auto.adder_depth <= 1


@pytest.mark.parametrize("p,order", [(8, 2), (10, 2), (11, 4), (13, 6)])
def test_ilp1_not_worse_than_ilp2(p, order):
    spec = redmill_spec(p, order, 9)
    grid = design_grid(spec)
    bounds = tighten(spec, grid)
    a1 = minimize_total_adders(spec, grid, bounds).total_adders
    a2 = solve_bounded_ad(spec, grid, bounds, 2).total_adders
    assert a1 <= a2


def test_relaxation_switch_same_optimum():
    spec = redmill_spec(11, 4, 9)
    grid = design_grid(spec)
    bounds = tighten(spec, grid)
    assert solve_bounded_ad(spec, grid, bounds, 2, relax=True).total_adders == \
        solve_bounded_ad(spec, grid, bounds, 2, relax=False).total_adders


def test_negative_stage_count_rejected():
    with pytest.raises(ValueError):
        build_ilp2(None, None, None, -1, targets=[3], wordlength=3)
