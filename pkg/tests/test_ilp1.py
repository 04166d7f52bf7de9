import sys
from pathlib import Path

import pytest

from mlfir.bounds import tighten
from mlfir.exceptions import IntegerInfeasible
from mlfir.graph import Optimality
from mlfir.grid import design_grid
from mlfir.ilp1 import build_ilp1, extract_from_ilp1, mcm_min_adders, minimize_total_adders, solve_fixed_am
from mlfir.milp import SolveOptions, Status, solve
from mlfir.spec import redmill_spec

sys.path.insert(0, str(Path(__file__).parent))
from oracles import scm_cost  # noqa: E402


@pytest.mark.parametrize("targets,cost", [([23], 2), ([7, 23], 2), ([3], 1), ([1], 0), ([0, 1], 0)])
def test_mcm_costs(targets, cost):
    n, g = mcm_min_adders(targets)
    assert n == cost
    g.simulate()
    assert g.coefficients(len(targets)) == targets
    assert g.adder_count == n


def test_fixed_am_feasibility_23():
    assert not solve_fixed_am(build_ilp1(None, None, None, 1, targets=[23])).feasible
    res = solve_fixed_am(build_ilp1(None, None, None, 2, targets=[23]))
    assert res.feasible and 23 in res.graph.simulate().values()


def test_fixed_am_zero_for_one():
    res = solve_fixed_am(build_ilp1(None, None, None, 0, targets=[1]))
    assert res.feasible and res.graph.adder_count == 0


def test_relaxed_and_integral_auxiliaries_agree():
    assert mcm_min_adders([7, 23], relax_aux=True)[0] == mcm_min_adders([7, 23], relax_aux=False)[0]


def test_output_shift_invariance():
    assert mcm_min_adders([7, 23])[0] == mcm_min_adders([14, 23 * 4])[0]
    assert mcm_min_adders([-7, 23])[0] == 2


@pytest.mark.parametrize("t", [11, 13, 19, 21, 25, 27, 29, 31, 45, 51])
def test_scm_against_exhaustive_search(t):
    assert mcm_min_adders([t])[0] == scm_cost(t, 10, 2 ** (t.bit_length() + 1))


def test_extract_simulates_and_matches_am():
    inst = build_ilp1(None, None, None, 3, targets=[7, 23, 45])
    out = solve(inst.model, SolveOptions(relax_listed_integers=frozenset(v.index for v in inst.relaxable)))
    assert out.status is Status.OPTIMAL
    g = extract_from_ilp1(inst, out.values)
    g.simulate()
    assert g.adder_count == 3 and g.coefficients(3) == [7, 23, 45]


def test_negative_adder_count_rejected():
    with pytest.raises(ValueError):
        build_ilp1(None, None, None, -1, targets=[3])


def test_mcm_limit():
    with pytest.raises(IntegerInfeasible):
        mcm_min_adders([23], max_adders=1)


def _run(p, order, B=9):
    spec = redmill_spec(p, order, B)
    grid = design_grid(spec)
    return spec, minimize_total_adders(spec, grid, tighten(spec, grid))


@pytest.mark.parametrize("p,order,total", [(4, 2, 0), (8, 2, 3), (10, 2, 4)])
def test_total_adders_small_redmill(p, order, total):
    spec, sol = _run(p, order)
    sol.check()
    assert sol.total_adders == total
    assert sol.optimality is Optimality.PROVEN_OPTIMAL
    assert sol.multiplier_adders == sol.graph.adder_count


def test_total_adders_trivial_design():
    # loose specification satisfied by the trivial filter h = (2^B, 0, ...)
    spec = redmill_spec(2, 4, 6)
    grid = design_grid(spec)
    sol = minimize_total_adders(spec, grid, tighten(spec, grid))
    assert sol.multiplier_adders == 0
