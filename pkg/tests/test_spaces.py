import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from morreylab.exponents import ExponentFunction
from morreylab.geometry import Ball, Cube, Grid, GridFunction
from morreylab.spaces import (
    AssociateCrossCheckError,
    Lebesgue,
    MorreySpace,
    VariableLebesgue,
    WeightedLebesgue,
    associate_norm,
    bmo_norm,
    bmo_x_norm,
    morrey_norm,
)
from morreylab.weights import Weight, WeightProfile, classical_morrey_profile

GRID = Grid.line(-4.0, 4.0, 1 / 64)
PV = ExponentFunction.from_callable(GRID, lambda x: 2 + 1 / np.log(np.e + np.abs(x)))
SPACES = [
    Lebesgue(2.0, GRID),
    Lebesgue(3.0, GRID),
    WeightedLebesgue(2.0, Weight.power(GRID, 0.5)),
    VariableLebesgue(PV),
]
BUMP = GridFunction.from_callable(GRID, lambda x: np.exp(-x * x) * (1 + 0.4 * x))


def test_lebesgue_indicator_norm():
    X = Lebesgue(3.0, GRID)
    assert X.indicator_norm(Cube((0.0,), 1.0)) == pytest.approx(1.0)
    assert X.indicator_norm(Cube((0.0,), 8.0)) == pytest.approx(8 ** (1 / 3))
    assert X.indicator_norm(Cube((0.0,), 100.0), clip=False) == pytest.approx(100 ** (1 / 3))


def test_quasi_norm_has_no_associate():
    with pytest.raises(ValueError):
        Lebesgue(0.5, GRID).associate()


@pytest.mark.parametrize("X", SPACES, ids=repr)
def test_holder_inequality(X):
    g = GridFunction.from_callable(GRID, lambda x: 1 / (1 + x * x))
    pairing = float(np.dot(np.abs(BUMP.values * g.values), GRID.cell_volumes()))
    assert pairing <= X.norm(BUMP) * X.associate().norm(g) * (1 + 1e-6)


@pytest.mark.parametrize("X", SPACES, ids=repr)
def test_associate_cross_check(X):
    associate_norm(BUMP, X, cross_check=True)


def test_cross_check_catches_wrong_associate():
    class Wrong(Lebesgue):
        def associate(self):
            return Lebesgue(4.0, self.grid)

    wide = GridFunction.from_callable(GRID, lambda x: (np.abs(x) <= 3).astype(float))
    with pytest.raises(AssociateCrossCheckError):
        associate_norm(wide, Wrong(2.0, GRID), cross_check=True)


@pytest.mark.parametrize("X", SPACES, ids=repr)
@given(r=st.floats(0.05, 3.0))
def test_indicator_duality_lower_bound(X, r):
    B = Ball((0.0,), r)
    s = X.indicator_norm(B) * X.associate().indicator_norm(B) / (2 * r)
    assert s >= 1 - 1e-6


@pytest.mark.parametrize("X", SPACES, ids=repr)
def test_lattice_property(X):
    small = BUMP * 0.5
    assert X.norm(small) <= X.norm(BUMP)
    assert X.norm(GridFunction.zeros(GRID)) == 0.0


def test_variable_conjugate_rule_equivalence():
    X = VariableLebesgue(PV, "conjugate")
    assert X.equivalence_constant == 2.0
    exact = VariableLebesgue(PV).associate().norm(BUMP)
    surrogate = X.associate().norm(BUMP)
    assert exact / 2 <= surrogate <= 2 * exact


def test_morrey_norm_of_constant_classical():
    X = Lebesgue(2.0, GRID)
    balls = [Ball((0.0,), 2.0**k) for k in range(-3, 2)]
    M = MorreySpace(X, classical_morrey_profile(X, 4.0, 2.0), balls)
    one = GridFunction.constant(GRID, 1.0)
    # ||chi_B||_2 / |B|^(1/2 - 1/4) = |B|^(1/4), largest on the largest ball
    assert morrey_norm(one, M) == pytest.approx(4.0 ** 0.25)
    val = morrey_norm(one, M, return_argmax=True)
    assert val.ball.radius == 2.0


def test_morrey_norm_homogeneous_and_subadditive():
    X = Lebesgue(2.0, GRID)
    M = MorreySpace(X, WeightProfile.power(0.25), [Ball((c,), r) for c in (0.0, 1.0) for r in (0.25, 0.5, 1.0)])
    g = GridFunction.from_callable(GRID, np.cos)
    assert M.norm(BUMP * -3) == pytest.approx(3 * M.norm(BUMP))
    assert M.norm(BUMP + g) <= M.norm(BUMP) + M.norm(g) + 1e-12


REGIONS = [Cube((c,), 2.0**k) for c in (0.0, 0.5) for k in range(-4, 2)]


def test_bmo_of_sign_on_centred_cube():
    b = GridFunction.from_callable(GRID, lambda x: np.sign(x))
    # the node at 0 carries sign(0) = 0 on a cell of length h
    assert bmo_norm(b, [Cube((0.0,), 1.0)]) == pytest.approx(1.0 - GRID.h, abs=1e-12)


@given(st.floats(-5, 5), st.floats(-3, 3))
def test_bmo_invariances(c, lam):
    b = GridFunction.from_callable(GRID, lambda x: np.log(np.abs(x) + 0.01))
    base = bmo_norm(b, REGIONS)
    assert bmo_norm(b + c, REGIONS) == pytest.approx(base, rel=1e-9, abs=1e-12)
    assert bmo_norm(b * lam, REGIONS) == pytest.approx(abs(lam) * base, rel=1e-9, abs=1e-12)


def test_bmo_x_norm_of_constant_is_zero():
    assert bmo_x_norm(GridFunction.constant(GRID, 4.0), Lebesgue(2.0, GRID), REGIONS) == pytest.approx(0.0, abs=1e-12)
