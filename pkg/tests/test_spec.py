import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mlfir.exceptions import SpecError
from mlfir.spec import (
    Band,
    FilterSpec,
    FilterType,
    Gain,
    basis_eval,
    basis_matrix,
    from_printed_order,
    lowpass_spec,
    redmill_spec,
    structural_adder_count,
    structural_adder_weights,
    to_printed_order,
    zero_phase_response,
)

S1C_H = from_printed_order([1, 2, 0, -4, -3, 6, 11, 0, -21, -18, 29, 96, 128])


def test_order_parity():
    assert FilterType.I.order_is_valid(24) and not FilterType.I.order_is_valid(23)
    assert FilterType.II.order_is_valid(23) and not FilterType.II.order_is_valid(24)
    assert FilterType.III.order_is_valid(10)
    assert FilterType.IV.order_is_valid(11)


@pytest.mark.parametrize("ftype,order,M", [("I", 24, 13), ("II", 23, 12), ("III", 24, 12), ("IV", 23, 12), ("I", 0, 1)])
def test_num_coefficients(ftype, order, M):
    assert FilterType.parse(ftype).num_coefficients(order) == M


def test_basis_examples():
    assert basis_eval("I", 0, 1.234) == 1.0
    assert basis_eval("I", 2, math.pi / 2) == pytest.approx(-2.0, abs=1e-12)
    assert basis_eval("IV", 3, 0.0) == 0.0


def test_basis_index_checked():
    with pytest.raises(IndexError):
        basis_eval("I", 5, 0.1, num_coefficients=5)
    with pytest.raises(IndexError):
        basis_eval("II", -1, 0.1)


@given(st.integers(1, 30), st.floats(0, math.pi))
def test_basis_matches_direct_trig(m, w):
    assert basis_eval("I", m, w) == pytest.approx(2 * math.cos(w * m), abs=1e-12)
    assert basis_eval("II", m, w) == pytest.approx(2 * math.cos(w * (m + 0.5)), abs=1e-12)
    assert basis_eval("IV", m, w) == pytest.approx(2 * math.sin(w * (m + 0.5)), abs=1e-12)
    assert basis_eval("I", m, -w) == pytest.approx(basis_eval("I", m, w), abs=1e-12)


def test_type_one_at_nyquist():
    for m in range(6):
        assert basis_eval("I", m, math.pi) == pytest.approx((1 if m == 0 else 2) * (-1) ** m, abs=1e-12)


def test_type_three_vanishes_at_band_ends():
    # odd symmetry with even order: zero response at 0 and pi for every coefficient
    V = basis_matrix("III", 6, np.array([0.0, math.pi]))
    assert np.allclose(V, 0.0, atol=1e-12)
    assert not np.allclose(basis_matrix("III", 6, np.array([0.4])), 0.0)


def test_zero_phase_examples():
    assert zero_phase_response([0] * 5, "I", 0.7) == 0.0
    assert zero_phase_response([1, 0, 0, 0], "I", 2.1) == 1.0


def test_zero_phase_published_type_one_in_passband():
    G, B, dp = 1.25615, 8, 0.0157
    w = np.linspace(0, 0.3 * math.pi, 200)
    H = zero_phase_response(S1C_H, "I", w)
    assert np.all(H >= G * 2**B * (1 - dp)) and np.all(H <= G * 2**B * (1 + dp))


@settings(max_examples=50)
@given(
    st.lists(st.integers(-300, 300), min_size=4, max_size=4),
    st.lists(st.integers(-300, 300), min_size=4, max_size=4),
    st.integers(-5, 5),
    st.integers(-5, 5),
)
def test_zero_phase_linear(h1, h2, a, b):
    w = np.linspace(0, math.pi, 17)
    lhs = zero_phase_response([a * x + b * y for x, y in zip(h1, h2)], "II", w)
    rhs = a * zero_phase_response(h1, "II", w) + b * zero_phase_response(h2, "II", w)
    assert np.allclose(lhs, rhs, rtol=1e-9, atol=1e-9)


def test_structural_adder_examples():
    assert structural_adder_count("I", 24, [False] * 13) == 24
    z = [False] * 13
    z[2] = z[7] = True
    assert structural_adder_count("I", 24, z) == 20
    z = [False] * 12
    z[4] = z[9] = True
    assert structural_adder_count("II", 23, z) == 19


def test_structural_adders_from_published_zeros():
    assert structural_adder_count("I", 24, [c == 0 for c in S1C_H]) == 20


def test_structural_adders_center_zero_type_one():
    z = [True] + [False] * 12
    assert structural_adder_count("I", 24, z) == 23


@pytest.mark.parametrize("ftype,order", [("I", 10), ("II", 11), ("III", 10), ("IV", 11)])
def test_structural_adders_no_zeros_is_order(ftype, order):
    M = FilterType.parse(ftype).num_coefficients(order)
    assert structural_adder_count(ftype, order, [False] * M) == order


@pytest.mark.parametrize("ftype,order", [("I", 10), ("II", 11), ("III", 10), ("IV", 11)])
def test_structural_weights_agree_with_count(ftype, order):
    M = FilterType.parse(ftype).num_coefficients(order)
    w = structural_adder_weights(ftype, M)
    rng = np.random.default_rng(1)
    for _ in range(20):
        z = rng.random(M) < 0.3
        assert structural_adder_count(ftype, order, z) == max(order - int(np.dot(w, z)), 0)


def test_printed_order_round_trip():
    printed = [1, 2, 3, 4]
    assert from_printed_order(printed) == [4, 3, 2, 1]
    assert to_printed_order(from_printed_order(printed)) == printed


def test_gain_parse():
    assert Gain.parse("fixed:1.25") == Gain.fixed(1.25)
    g = Gain.parse("variable")
    assert g.variable and g.bounds == (2 / 3, 4 / 3)
    assert Gain.parse("variable:1:2").bounds == (1.0, 2.0)
    for bad in ("wobbly", "variable:1", "fixed:x"):
        with pytest.raises(SpecError):
            Gain.parse(bad)


def test_spec_validation_errors():
    bands = (Band(0, Fraction(1, 2), 0.9, 1.1),)
    with pytest.raises(SpecError):
        FilterSpec(bands, order=23, ftype="I", wordlength=8)
    with pytest.raises(SpecError):
        FilterSpec(bands, order=24, ftype="I", wordlength=0)
    with pytest.raises(SpecError):
        FilterSpec((), order=24, ftype="I", wordlength=8)
    with pytest.raises(SpecError):
        FilterSpec((Band(0, 0.5, 0, 1), Band(0.4, 1, 0, 1)), order=24, ftype="I", wordlength=8)
    with pytest.raises(SpecError):
        Band(0.6, 0.5, 0, 1)
    with pytest.raises(SpecError):
        Band(0.1, 0.5, 1, 0)


def test_band_edges_exact():
    b = Band(0.3, 0.5, 0, 1)
    assert b.lo == Fraction(3, 10) and b.hi == Fraction(1, 2)


def test_spec_json_round_trip(tmp_path):
    spec = lowpass_spec(0.3, 0.5, 0.0157, 0.0066, order=24, ftype="I", wordlength=8, gain=Gain.interval())
    path = tmp_path / "s.json"
    spec.dump(path)
    again = FilterSpec.load(path)
    assert again == spec
    d = json.loads(path.read_text())
    assert d["type"] == "I" and d["gain"]["mode"] == "variable"


def test_spec_json_documented_example():
    text = ('{ "type": "I", "order": 24, "wordlength": 8, "gain": {"mode":"variable","lo":0.6667,"hi":1.3333}, '
            '"bands": [ {"from_pi":0.0,"to_pi":0.3,"lower":0.9843,"upper":1.0157}, '
            '{"from_pi":0.5,"to_pi":1.0,"lower":-0.0066,"upper":0.0066} ] }')
    spec = FilterSpec.from_dict(json.loads(text))
    assert spec.num_coefficients == 13 and spec.gain.bounds == (0.6667, 1.3333)
    assert spec.bands[0].hi == Fraction(3, 10)


def test_spec_malformed(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(SpecError):
        FilterSpec.load(p)
    with pytest.raises(SpecError):
        FilterSpec.from_dict({"type": "I"})


def test_widened():
    spec = redmill_spec(10, 8).with_(allow_error=0.01)
    w = spec.widened()
    assert w.allow_error == 0
    assert w.bands[0].lower == pytest.approx(spec.bands[0].lower - 0.01)
    assert w.bands[1].upper == pytest.approx(spec.bands[1].upper + 0.01)


def test_redmill_family():
    s = redmill_spec(20, 16)
    assert s.bands[1].upper == pytest.approx(0.1)
    assert s.bands[0].hi == Fraction(3, 10) and s.bands[1].lo == Fraction(1, 2) and s.bands[1].hi == 1
    assert not s.gain.variable and s.gain.value == 1.0
