import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from morreylab.exponents import ExponentFunction
from morreylab.geometry import Ball, Cube, Grid, GridFunction
from morreylab.spaces import Lebesgue, VariableLebesgue, WeightedLebesgue
from morreylab.verify import (
    ExperimentReport,
    averaging_closed_form,
    characteristic_condition,
    chi_duality_check,
    holder_check,
    oscillation_pair_ratio,
    recompute_verdict,
    verdict_from_checks,
)
from morreylab.verify.families import (
    Dipole,
    GaussPoly,
    LogTruncated,
    SignedLogTruncated,
    Spike,
    bmo_growth_family,
    random_pairs,
)
from morreylab.verify.report import make_check
from morreylab.weights import Weight

GRID = Grid.line(-4.0, 4.0, 1 / 64)


def test_verdict_rules():
    ok = [make_check("a", 1.0, "<=", 2.0)]
    bad = ok + [make_check("b", 3.0, "<", 2.0)]
    assert verdict_from_checks([], []) == "inconclusive"
    assert verdict_from_checks(ok, []) == "pass"
    assert verdict_from_checks(bad, []) == "fail"
    grows = [{"h": 0.1, "headline": 1.0}, {"h": 0.05, "headline": 1.2}]
    assert verdict_from_checks(ok, grows) == "fail"


def test_nan_check_fails():
    assert not make_check("x", math.nan, "<=", 1.0)["passed"]
    with pytest.raises(ValueError):
        make_check("x", 1.0, "~", 1.0)


def test_report_roundtrip_and_hash():
    rep = ExperimentReport("demo", "holder", config={"seed": 1}, headline=0.5)
    rep.add_check("bound", 0.5, "<=", 1.0)
    rep.rows.append({"input": "f", "ratio": math.inf})
    rep.finalize()
    rep.timing["seconds"] = 1.0
    d = json.loads(rep.to_json())
    assert d["rows"][0]["ratio"] == "inf"
    assert recompute_verdict(d) == rep.verdict == "pass"
    back = ExperimentReport.from_dict(d)
    back.timing["seconds"] = 99.0
    assert back.content_hash() == rep.content_hash()


def test_families():
    x = np.linspace(-1, 1, 9)
    assert np.all(GaussPoly(0.0, 0.5, cutoff=1.0)(np.array([0.75])) == 0)
    d = Dipole(Cube((-0.5,), 1.0), Cube((0.5,), 1.0))(np.array([-0.5, 0.5]))
    assert list(d) == [1.0, -1.0]
    assert np.all(np.abs(SignedLogTruncated(2.0)(x)) <= 2.0)
    assert np.all(LogTruncated(3.0)(x) >= -3.0)
    assert Spike(0.0, 4.0)(np.array([0.0, 0.2])).tolist() == [4.0, 0.0]
    a = random_pairs(GRID, 3, 7)
    b = random_pairs(GRID, 3, 7)
    assert all(np.array_equal(p[1].values, q[1].values) for p, q in zip(a, b))


@given(st.integers(-8, -2))
def test_oscillation_pair_inequality(j):
    g = Grid.line(-1.0, 1.0, 2.0**-9)
    b = bmo_growth_family(g, [4.0])[0]
    s = 2.0**j
    assert oscillation_pair_ratio(b, Cube((s / 2,), s), Cube((-1.5 * s,), s)) <= 2 + 1e-6


def test_holder_check_and_control():
    box = GridFunction.from_callable(GRID, lambda x: (np.abs(x) <= 3).astype(float))
    pairs = [("box", box, box), ("g", GridFunction.from_callable(GRID, GaussPoly(0.0, 0.5)), box)]
    assert holder_check(pairs, Lebesgue(2.0, GRID)).verdict == "pass"
    assert holder_check(pairs, Lebesgue(2.0, GRID), associate=Lebesgue(4.0, GRID)).verdict == "fail"


def test_chi_duality_lebesgue_is_exact():
    g = Grid.line(-10.0, 10.0, 1 / 32)
    balls = [Ball((0.0,), 2.0**k) for k in range(-3, 3)]
    rep = chi_duality_check(Lebesgue(2.0, g), balls)
    assert rep.verdict == "pass"
    assert rep.headline == pytest.approx(1.0)


def test_characteristic_discriminates():
    balls = [Ball((0.0,), 2.0**k) for k in range(-3, 2)]
    L = lambda p: Lebesgue(p, GRID)
    assert characteristic_condition(L(2.0), L(2.0), L(1.0), 0.0, balls).verdict == "pass"
    assert characteristic_condition(L(2.0), L(2.0), L(2.0), 0.0, balls).verdict == "fail"


def test_averaging_closed_form_lebesgue():
    Q = Cube((0.0,), 2.0)
    X1, X2, Y = Lebesgue(2.0, GRID), Lebesgue(4.0, GRID), Lebesgue(4 / 3, GRID)
    # |Q|^(a - 2) |Q|^(3/4) |Q|^(1/2) |Q|^(3/4) = |Q|^a at n = 1
    assert averaging_closed_form(X1, X2, Y, 0.5, Q) == pytest.approx(2.0**0.5)
