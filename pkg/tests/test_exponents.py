import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from morreylab.exponents import (
    ExponentFunction,
    conjugate,
    dual_exponent,
    harmonic_mean_exponent,
    load_exponent,
    log_holder_constants,
    luxemburg_norm,
    modular,
    save_exponent,
)
from morreylab.geometry import Cube, Grid, GridFunction, region_measure
from morreylab.spaces import Lebesgue

GRID = Grid.line(-2.0, 2.0, 1 / 64)
LOG_DECAY = ExponentFunction.from_callable(GRID, lambda x: 2 + 1 / np.log(np.e + np.abs(x)))


def test_golden_ratio_oracle():
    h = 1 / 512
    g = Grid.line(-h / 2, 2 + h / 2, h)
    p = ExponentFunction.from_callable(g, lambda x: np.where(x <= 1, 1.0, 2.0))
    f = GridFunction.from_callable(g, lambda x: ((x >= 0) & (x <= 2)).astype(float))
    assert luxemburg_norm(f, p) == pytest.approx((1 + math.sqrt(5)) / 2, abs=1e-4)


def test_rejects_exponent_below_one():
    with pytest.raises(ValueError):
        ExponentFunction(GRID, np.full(GRID.size, 0.9))


def test_conjugate_endpoints():
    assert conjugate(1.0) == math.inf
    assert conjugate(math.inf) == 1.0
    assert conjugate(3.0) == pytest.approx(1.5)


def test_dual_exponent_pointwise():
    q = dual_exponent(LOG_DECAY)
    assert np.allclose(1 / LOG_DECAY.values + 1 / q.values, 1.0)


@given(st.floats(1.0, 6.0), st.floats(0.1, 3.0))
def test_constant_exponent_matches_lebesgue(p, scale):
    f = GridFunction.from_callable(GRID, lambda x: scale * np.exp(-x * x) * (1 + 0.3 * x))
    lux = luxemburg_norm(f, ExponentFunction.constant(GRID, p))
    assert lux == pytest.approx(Lebesgue(p, GRID).norm(f), rel=1e-6)


@given(st.floats(-4.0, 4.0).filter(lambda t: abs(t) > 1e-3))
def test_luxemburg_homogeneous(lam):
    f = GridFunction.from_callable(GRID, lambda x: np.cos(3 * x))
    assert luxemburg_norm(f * lam, LOG_DECAY) == pytest.approx(abs(lam) * luxemburg_norm(f, LOG_DECAY), rel=1e-6)


@given(st.floats(-1, 1), st.floats(-1, 1))
def test_luxemburg_triangle(a, b):
    f = GridFunction.from_callable(GRID, lambda x: np.exp(-((x - a) ** 2)))
    g = GridFunction.from_callable(GRID, lambda x: np.sin(4 * x + b))
    assert luxemburg_norm(f + g, LOG_DECAY) <= (luxemburg_norm(f, LOG_DECAY) + luxemburg_norm(g, LOG_DECAY)) * (1 + 1e-6)


def test_modular_at_norm_is_one():
    f = GridFunction.from_callable(GRID, lambda x: 1 + x * x)
    lam = luxemburg_norm(f, LOG_DECAY, rtol=1e-12)
    assert modular(f / lam, LOG_DECAY) == pytest.approx(1.0, rel=1e-6)


def test_infinite_exponent_region_uses_sup():
    p = ExponentFunction.from_callable(GRID, lambda x: np.where(x < 0, np.inf, 2.0))
    f = GridFunction.from_callable(GRID, lambda x: np.where(x < 0, 3.0, 0.0))
    assert luxemburg_norm(f, p) == pytest.approx(3.0, rel=1e-6)


def test_harmonic_mean_of_constant():
    p = ExponentFunction.constant(GRID, 3.0)
    assert harmonic_mean_exponent(p, Cube((0.0,), 1.0)) == pytest.approx(3.0)


def test_indicator_asymptotic_band():
    g = Grid.line(-10.0, 10.0, 1 / 64)
    p = ExponentFunction.from_callable(g, lambda x: 2 + 1 / np.log(np.e + np.abs(x)))
    ratios = []
    for k in range(-4, 3):
        Q = Cube((0.0,), 2.0**k)
        chi = GridFunction.from_callable(g, lambda x, Q=Q: Q.contains(x[:, None]).astype(float))
        ratios.append(luxemburg_norm(chi, p, Q) / region_measure(g, Q) ** (1 / harmonic_mean_exponent(p, Q)))
    assert 0.9 < min(ratios) <= max(ratios) < 1.1


def test_log_holder_constant_exponent_is_zero():
    cert = log_holder_constants(ExponentFunction.constant(GRID, 2.5))
    assert cert.c_local == 0 and cert.c_infinity == 0


def test_log_holder_decay_is_finite():
    cert = log_holder_constants(LOG_DECAY)
    assert 0 < cert.c_local < 5
    assert cert.c_infinity < 5


def test_log_holder_rejects_unbounded():
    p = ExponentFunction.from_callable(GRID, lambda x: np.where(x < 0, np.inf, 2.0))
    with pytest.raises(ValueError):
        log_holder_constants(p)


def test_exponent_csv_roundtrip(tmp_path):
    save_exponent(tmp_path / "p.csv", LOG_DECAY)
    q = load_exponent(tmp_path / "p.csv")
    assert np.allclose(q.values, LOG_DECAY.values)
