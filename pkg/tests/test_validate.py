import json

import numpy as np
import pytest

from mlfir.benchmarks import PUBLISHED_DESIGNS
from mlfir.exceptions import Diverged
from mlfir.graph import Optimality
from mlfir.grid import uniform_grid
from mlfir.spec import Band, FilterSpec, Gain, lowpass_spec, redmill_spec
from mlfir.validate import (
    NoImprovement,
    adjust_gain,
    dense_grid,
    design,
    minimal_order,
    normalized_response,
    quantized_feasible,
    response_csv,
    validate,
    write_bundle,
)

S1C_SY11A = [d for d in PUBLISHED_DESIGNS if d.name == "S1c" and d.origin == "sy11a"][0]


def flat_spec(lower, upper, gain=Gain.interval(0.5, 2.0), B=4):
    return FilterSpec((Band(0, 1, lower, upper),), order=0, ftype="I", wordlength=B, gain=gain)


def test_dense_grid_density():
    spec = redmill_spec(10, 24, 8)
    g = dense_grid(spec)
    assert len(g) >= 128 * spec.num_coefficients - 2
    assert {0.0, 0.3, 0.5, 1.0} <= set(np.round(g.x, 12).tolist())


def test_published_exact_rows_are_valid():
    for d in PUBLISHED_DESIGNS:
        if d.origin == "ilp" and d.error == 0:
            assert validate(d.h, d.gain, d.spec()).max_violation == 0, d.label


def test_published_error_rows():
    rep = validate(S1C_SY11A.h, S1C_SY11A.gain, S1C_SY11A.spec())
    assert rep.max_violation == pytest.approx(0.00118, rel=0.1)
    assert not rep.valid and rep.side in ("lower", "upper")


def test_zero_filter_violation():
    spec = redmill_spec(20, 4, 8)
    rep = validate([0, 0, 0], 1.0, spec)
    assert rep.max_violation == pytest.approx(spec.bands[0].lower)
    assert rep.side == "lower" and rep.omega_max <= 0.3 * np.pi + 1e-12
    assert rep.band_worst[1][1] == 0.0


def test_report_dict():
    d = validate([0, 0, 0], 1.0, redmill_spec(20, 4, 8)).to_dict()
    assert set(d) == {"max_violation", "omega_max_over_pi", "side", "band_worst", "points"}


def test_adjust_gain_valid_unchanged():
    spec = flat_spec(0.9, 1.1)
    rep = validate([16], 1.0, spec)
    assert adjust_gain([16], 1.0, spec, rep) == (1.0, rep)


def test_adjust_gain_uniform_upper_violation():
    spec = flat_spec(0.9, 1.0)
    rep = validate([17], 1.0, spec)
    assert rep.side == "upper" and rep.max_violation == pytest.approx(1 / 16)
    g, rep2 = adjust_gain([17], 1.0, spec, rep)
    H = 17 / 16
    assert g == pytest.approx(H * 1.0 / 1.0, rel=1e-8)
    assert g > H and rep2.valid


def test_adjust_gain_fixed():
    spec = flat_spec(0.9, 1.0, Gain.fixed(1.0))
    with pytest.raises(NoImprovement):
        adjust_gain([17], 1.0, spec, validate([17], 1.0, spec))


def test_adjust_gain_opposite_violations():
    spec = lowpass_spec(0.3, 0.5, 0.1, 0.1, order=2, ftype="I", wordlength=4, gain=Gain.interval())
    h = [8, 4]
    rep = validate(h, 1.0, spec)
    assert not rep.valid
    with pytest.raises(NoImprovement):
        adjust_gain(h, 1.0, spec, rep)


def test_adjust_gain_clamped():
    spec = flat_spec(0.9, 1.0, Gain.interval(0.5, 1.01))
    with pytest.raises(NoImprovement):
        adjust_gain([20], 1.0, spec, validate([20], 1.0, spec))


def test_gain_rescale_keeps_topology():
    spec = redmill_spec(10, 2, 9).with_(gain=Gain.interval(0.5, 2.0))
    run = design(spec)
    g = run.solution.graph.to_json()
    rep = validate(run.solution.coefficients, run.solution.gain * 1.001, spec)
    if not rep.valid:
        try:
            adjust_gain(run.solution.coefficients, run.solution.gain * 1.001, spec, rep)
        except NoImprovement:
            pass
    assert run.solution.graph.to_json() == g


def test_design_trivial():
    run = design(redmill_spec(2, 2, 9))
    assert run.solution.total_adders == 0 and len(run.iterations) == 1
    assert run.report.valid


@pytest.mark.parametrize("method", ["ilp1", "ilp2"])
def test_design_redmill_valid(method):
    run = design(redmill_spec(12, 4, 9), method=method, ad=2)
    sol = run.solution
    sol.check()
    assert validate(sol.coefficients, sol.gain, sol.spec).valid
    assert sol.violation == 0 and sol.optimality is Optimality.PROVEN_OPTIMAL
    sizes = [e["grid_size"] for e in run.iterations]
    assert sizes == sorted(sizes)


def test_design_deterministic():
    spec = redmill_spec(13, 6, 9)
    a = design(spec, ad=2)
    b = design(spec, ad=2)
    assert a.solution.to_dict() == b.solution.to_dict()
    assert a.grid == b.grid and a.bounds == b.bounds


def test_design_with_error_allowance_reports_original_violation():
    spec = redmill_spec(13, 4, 9).with_(allow_error=0.02)
    run = design(spec, ad=2)
    plain = validate(run.solution.coefficients, run.solution.gain, spec)
    assert run.solution.violation == plain.max_violation
    assert plain.max_violation <= 0.02 + 1e-9
    assert validate(run.solution.coefficients, run.solution.gain, spec.widened()).valid


def test_design_unknown_method():
    with pytest.raises(ValueError):
        design(redmill_spec(2, 2, 9), method="ilp3")


def test_design_refines_coarse_grid():
    spec = redmill_spec(20, 12, 9)
    run = design(spec, grid=uniform_grid(spec, 2))
    assert len(run.iterations) > 1 and run.report.valid
    assert len(run.grid) > 4


def test_design_iteration_cap():
    # the band edges alone need several refinements for this spec
    spec = redmill_spec(20, 12, 9)
    grid = uniform_grid(spec, 2)
    with pytest.raises(Diverged):
        design(spec, grid=grid, max_iter=1)


def test_bundle(tmp_path):
    run = design(redmill_spec(10, 2, 9))
    out = write_bundle(run, tmp_path / "o")
    names = sorted(p.name for p in out.iterdir())
    assert names == ["graph.dot", "log.txt", "response.csv", "solution.json"]
    d = json.loads((out / "solution.json").read_text())
    assert d["A"] == 4 and d["validation"]["max_violation"] == 0
    assert (out / "response.csv").read_text().startswith("omega_over_pi,H_normalized,lower,upper\n")
    assert "final: A=4" in (out / "log.txt").read_text()


def test_response_csv_matches_normalized():
    spec = redmill_spec(10, 2, 9)
    rows = response_csv([161, 161], 1.0, spec, density=8).splitlines()[1:]
    x, H = float(rows[0].split(",")[0]), float(rows[0].split(",")[1])
    assert H == pytest.approx(normalized_response([161, 161], 1.0, spec, [x])[0], rel=1e-10)


def test_quantized_feasibility_and_minimal_order():
    make = lambda n: redmill_spec(11, n, 9)
    assert not quantized_feasible(make(2))
    assert quantized_feasible(make(4))
    assert minimal_order(make) == 4
