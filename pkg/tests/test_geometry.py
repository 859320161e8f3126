import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from morreylab.geometry import (
    Ball,
    Cube,
    Grid,
    GridFunction,
    dyadic_radii,
    integrate,
    load_grid_function,
    region_average,
    region_measure,
    restrict,
    save_grid_function,
)

LINE = Grid.line(-2.0, 2.0, 1 / 64)
SQUARE = Grid.square((-1.0, -1.0), (1.0, 1.0), 1 / 32)


def test_grid_shape_and_volume():
    assert LINE.shape == (257,)
    assert LINE.size == 257
    assert LINE.volume == pytest.approx(4.0)
    assert SQUARE.shape == (65, 65)
    assert LINE.cell_volumes().sum() == pytest.approx(4.0)
    assert SQUARE.cell_volumes().sum() == pytest.approx(4.0)


def test_grid_rejects_bad_spacing():
    with pytest.raises(ValueError):
        Grid.line(0.0, 1.0, 0.3)
    with pytest.raises(ValueError):
        Grid.line(1.0, 0.0, 0.5)
    with pytest.raises(ValueError):
        Grid(3, (0, 0, 0), (1, 1, 1), 0.5)


def test_node_index_roundtrip():
    i = LINE.node_index((0.5,))
    assert LINE.node(i)[0] == pytest.approx(0.5)
    with pytest.raises(ValueError):
        LINE.node_index((0.5 + 1 / 128,))


def test_trapezoid_is_exact_for_linear_functions():
    f = GridFunction.from_callable(LINE, lambda x: 3 * x + 1)
    assert integrate(f) == pytest.approx(4.0, abs=1e-12)


def test_interval_measure_is_exact_off_node():
    Q = Cube((0.013,), 0.77)
    assert region_measure(LINE, Q) == pytest.approx(0.77, abs=1e-14)
    B = Ball((0.2,), 0.31)
    assert region_measure(LINE, B) == pytest.approx(0.62, abs=1e-14)


def test_disc_measure_close_to_pi_r2():
    B = Ball((0.1, -0.05), 0.5)
    assert region_measure(SQUARE, B) == pytest.approx(math.pi * 0.25, rel=1e-12)


def test_region_clipped_to_box():
    assert region_measure(LINE, Cube((2.0,), 2.0)) == pytest.approx(1.0)
    assert region_measure(LINE, Cube((10.0,), 1.0)) == 0.0


@given(st.floats(-1.5, 1.5), st.floats(0.05, 0.45))
def test_quadrature_additive_over_halves(c, half):
    f = GridFunction.from_callable(LINE, lambda x: np.exp(-x * x) * (1 + x))
    whole = integrate(f, Cube((c,), 2 * half))
    left = integrate(f, Cube((c - half / 2,), half))
    right = integrate(f, Cube((c + half / 2,), half))
    assert whole == pytest.approx(left + right, rel=1e-12, abs=1e-14)


def test_region_average_of_constant():
    f = GridFunction.constant(LINE, 2.5)
    assert region_average(f, Ball((0.3,), 0.2)) == pytest.approx(2.5)


def test_arithmetic_keeps_source_for_resampling():
    f = GridFunction.from_callable(LINE, np.sin)
    g = (f * 2 + 1).on(LINE.refined())
    x = LINE.refined().coords()[:, 0]
    assert np.allclose(g.values, 2 * np.sin(x) + 1)


def test_resample_without_source_raises():
    f = GridFunction(LINE, np.zeros(LINE.size))
    with pytest.raises(ValueError):
        f.on(LINE.refined())


def test_non_finite_rejected():
    v = np.zeros(LINE.size)
    v[3] = np.nan
    with pytest.raises(ValueError):
        GridFunction(LINE, v)


def test_restrict_zeroes_outside():
    f = restrict(GridFunction.constant(LINE, 1.0), Cube((0.0,), 1.0))
    x = LINE.coords()[:, 0]
    assert np.all(f.values[np.abs(x) > 0.5] == 0)
    assert np.all(f.values[np.abs(x) <= 0.5] == 1)


def test_dyadic_radii_default_range():
    r = dyadic_radii(LINE)
    assert r[0] == pytest.approx(2 ** -5)
    assert r[-1] == pytest.approx(2.0)


def test_csv_roundtrip(tmp_path):
    f = GridFunction.from_callable(SQUARE, lambda x: x[:, 0] - 2 * x[:, 1])
    path = tmp_path / "f.csv"
    save_grid_function(path, f)
    g = load_grid_function(path)
    assert g.grid == f.grid
    assert np.allclose(g.values, f.values)
