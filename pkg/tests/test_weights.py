import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from morreylab.geometry import Ball, Cube, Grid
from morreylab.spaces import Lebesgue
from morreylab.weights import (
    Weight,
    WeightProfile,
    ap_constant,
    apq_constant,
    classical_morrey_profile,
    multiple_weight_constant,
    reverse_holder_ratio,
    w_class_check,
    weighted_morrey_profile,
)

GRID = Grid.line(-4.0, 4.0, 1 / 64)
ORIGIN_CUBES = [Cube((0.0,), 2.0**k) for k in range(-3, 3)]


@given(st.floats(-0.9, 2.0), st.floats(0.05, 3.5))
def test_power_measure_closed_form(a, r):
    w = Weight.power(GRID, a)
    assert w.measure(Cube((0.0,), 2 * r)) == pytest.approx(2 * r ** (a + 1) / (a + 1), rel=1e-10)


def test_power_weight_integrability_guard():
    with pytest.raises(ValueError):
        Weight.power(GRID, -1.0)


def test_weight_must_be_positive():
    with pytest.raises(ValueError):
        Weight.from_callable(GRID, lambda x: x)


def test_unclipped_measure_beyond_box():
    w = Weight.power(GRID, 0.5)
    assert w.measure(Cube((0.0,), 20.0), clip=False) == pytest.approx(2 * 10**1.5 / 1.5)
    assert w.measure(Cube((0.0,), 20.0)) == pytest.approx(2 * 4**1.5 / 1.5)


def test_ap_constant_of_power_weight():
    a, p = 0.5, 2.0
    expected = 1 / (a + 1) * (1 / (1 - a / (p - 1))) ** (p - 1)
    c = ap_constant(Weight.power(GRID, a), p, ORIGIN_CUBES)
    assert c.value == pytest.approx(expected, rel=1e-10)
    assert max(c.per_region) - min(c.per_region) < 1e-10


def test_ap_constant_unit_weight_is_one():
    assert ap_constant(Weight.unit(GRID), 3.0, ORIGIN_CUBES).value == pytest.approx(1.0)


def test_ap_constant_grows_outside_class():
    # |x|^a is in A_2 only for -1 < a < 1: the constant 1/((1+a)(1-a)) blows up at a = 1
    for a in (0.5, 0.9, 0.99):
        c = ap_constant(Weight.power(GRID, a), 2.0, ORIGIN_CUBES).value
        assert c == pytest.approx(1 / ((1 + a) * (1 - a)), rel=1e-9)


def test_apq_constant_unit_weight():
    assert apq_constant(Weight.unit(GRID), 2.0, 4.0, ORIGIN_CUBES).value == pytest.approx(1.0)
    with pytest.raises(ValueError):
        apq_constant(Weight.unit(GRID), 4.0, 2.0, ORIGIN_CUBES)


def test_multiple_weight_constant_unit_weights():
    w = Weight.unit(GRID)
    assert multiple_weight_constant(w, w, 2.0, 4.0, None, ORIGIN_CUBES).value == pytest.approx(1.0)


def test_reverse_holder_ratio_at_most_one():
    w1, w2 = Weight.power(GRID, 0.3), Weight.power(GRID, -0.4)
    for Q in ORIGIN_CUBES + [Cube((1.0,), 1.0)]:
        assert reverse_holder_ratio(w1, w2, 2.0, 4.0, Q) <= 1 + 1e-12


def test_profiles():
    u = WeightProfile.power(0.5, 2.0)
    assert u(Ball((0.0,), 4.0)) == pytest.approx(4.0)
    v = classical_morrey_profile(Lebesgue(2.0), 4.0, 2.0)
    assert v(Ball((0.0,), 0.5)) == pytest.approx(1.0 ** 0.25)
    w = weighted_morrey_profile(Weight.power(GRID, 0.0), 0.5, 2.0)
    assert w(Ball((0.0,), 1.0)) == pytest.approx(2.0 ** 0.25)
    with pytest.raises(ValueError):
        weighted_morrey_profile(Weight.unit(GRID), 1.5, 2.0)


def test_tabulated_profile_lookup():
    u = WeightProfile.tabulated({((0.0,), 1.0): 2.0})
    assert u(Ball((0.0,), 1.0)) == 2.0
    with pytest.raises(KeyError):
        u(Ball((0.0,), 2.0))


def test_w_class_classical_profile_passes():
    X = Lebesgue(2.0)
    cert = w_class_check(classical_morrey_profile(X, 4.0, 2.0), X, 0.0)
    assert cert.verdict == "pass"
    assert cert.last_term_ratio < 1


def test_w_class_alpha_too_large_fails():
    X = Lebesgue(2.0)
    cert = w_class_check(classical_morrey_profile(X, 4.0, 2.0), X, 0.9)
    assert cert.verdict == "fail"


def test_w_class_certificate_json():
    X = Lebesgue(2.0)
    d = w_class_check(classical_morrey_profile(X, 4.0, 2.0), X, 0.0).to_dict()
    assert {"c13_min_u_large_r", "doubling", "partial_sums", "notes"} <= set(d)
    assert not math.isnan(d["doubling"])
