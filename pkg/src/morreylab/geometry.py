"""Uniform grids, balls and cubes, and region-aware quadrature.

Every grid node owns the dual cell ``[x - h/2, x + h/2]^n`` clipped to the
box, so integrating over the whole grid is the composite trapezoid rule.
Integrals over a ball or cube weight each node by the exact measure of
``cell ∩ region ∩ box`` (interval overlap in 1D, rectangle overlap for cubes,
circular-segment area for discs), which makes quadrature additive over
disjoint partitions of a region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

_REL_TOL = 1e-12


@dataclass(frozen=True)
class Grid:
    """Uniform grid with spacing ``h`` on the box ``[lower, upper]`` in R^n."""

    n: int
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    h: float

    def __post_init__(self):
        if self.n not in (1, 2):
            raise ValueError(f"grid dimension must be 1 or 2, got {self.n}")
        lower = tuple(float(v) for v in np.atleast_1d(self.lower))
        upper = tuple(float(v) for v in np.atleast_1d(self.upper))
        if len(lower) != self.n or len(upper) != self.n:
            raise ValueError("lower/upper must have one entry per dimension")
        if not self.h > 0:
            raise ValueError("spacing h must be positive")
        for lo, up in zip(lower, upper):
            if not up > lo:
                raise ValueError("upper corner must exceed lower corner")
            ratio = (up - lo) / self.h
            if abs(ratio - round(ratio)) > _REL_TOL * max(1.0, ratio) * 10:
                raise ValueError(
                    f"box length {up - lo} is not an integer multiple of h={self.h}"
                )
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "h", float(self.h))

    @classmethod
    def line(cls, lower: float, upper: float, h: float) -> "Grid":
        return cls(1, (lower,), (upper,), h)

    @classmethod
    def square(cls, lower: Sequence[float], upper: Sequence[float], h: float) -> "Grid":
        return cls(2, tuple(lower), tuple(upper), h)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(int(round((up - lo) / self.h)) + 1 for lo, up in zip(self.lower, self.upper))

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def volume(self) -> float:
        return float(np.prod([up - lo for lo, up in zip(self.lower, self.upper)]))

    @property
    def half_width(self) -> float:
        return min(up - lo for lo, up in zip(self.lower, self.upper)) / 2.0

    @property
    def cell_volume(self) -> float:
        return self.h**self.n

    def axes(self) -> list[np.ndarray]:
        return [lo + self.h * np.arange(m) for lo, m in zip(self.lower, self.shape)]

    def coords(self) -> np.ndarray:
        """Node coordinates, shape ``(size, n)``, row-major node order."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def cell_volumes(self) -> np.ndarray:
        """Box-clipped dual-cell measure of every node (trapezoid weights)."""
        per_axis = []
        for m in self.shape:
            w = np.full(m, self.h)
            w[0] = w[-1] = self.h / 2
            per_axis.append(w)
        if self.n == 1:
            return per_axis[0]
        return np.outer(per_axis[0], per_axis[1]).ravel()

    def refined(self, factor: int = 2) -> "Grid":
        return Grid(self.n, self.lower, self.upper, self.h / factor)

    def with_spacing(self, h: float) -> "Grid":
        return Grid(self.n, self.lower, self.upper, h)

    def node_index(self, point) -> int:
        """Flat index of the node at ``point``; raises if ``point`` is not a node."""
        pt = np.atleast_1d(np.asarray(point, dtype=float))
        if pt.shape != (self.n,):
            raise ValueError(f"expected a point in R^{self.n}")
        idx = []
        for k in range(self.n):
            t = (pt[k] - self.lower[k]) / self.h
            i = int(round(t))
            if abs(t - i) > 1e-6 or not 0 <= i < self.shape[k]:
                raise ValueError(f"{tuple(pt)} is not a grid node")
            idx.append(i)
        return int(np.ravel_multi_index(tuple(idx), self.shape))

    def node(self, index: int) -> np.ndarray:
        multi = np.unravel_index(int(index), self.shape)
        return np.array([lo + self.h * i for lo, i in zip(self.lower, multi)])

    def to_dict(self) -> dict:
        return {"n": self.n, "lower": list(self.lower), "upper": list(self.upper), "h": self.h}


@dataclass(frozen=True)
class Ball:
    center: tuple[float, ...]
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in np.atleast_1d(self.center)))
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def n(self) -> int:
        return len(self.center)

    @property
    def measure(self) -> float:
        return ball_measure(self.radius, self.n)

    def dilate(self, k: float) -> "Ball":
        return Ball(self.center, k * self.radius)

    def contains(self, points: np.ndarray) -> np.ndarray:
        d = np.asarray(points, dtype=float) - np.asarray(self.center)
        return np.sum(d * d, axis=-1) <= (self.radius * (1 + _REL_TOL)) ** 2


@dataclass(frozen=True)
class Cube:
    center: tuple[float, ...]
    side: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in np.atleast_1d(self.center)))
        if not self.side > 0:
            raise ValueError("cube side must be positive")
        object.__setattr__(self, "side", float(self.side))

    @property
    def n(self) -> int:
        return len(self.center)

    @property
    def measure(self) -> float:
        return self.side**self.n

    def dilate(self, k: float) -> "Cube":
        return Cube(self.center, k * self.side)

    def contains(self, points: np.ndarray) -> np.ndarray:
        d = np.abs(np.asarray(points, dtype=float) - np.asarray(self.center))
        return np.all(d <= self.side / 2 * (1 + _REL_TOL), axis=-1)


Region = Ball | Cube | None


def ball_measure(radius: float, n: int) -> float:
    return 2.0 * radius if n == 1 else math.pi * radius**2


def _interval_overlap(lo: np.ndarray, hi: np.ndarray, a: float, b: float) -> np.ndarray:
    return np.clip(np.minimum(hi, b) - np.maximum(lo, a), 0.0, None)


def _disc_quadrant(a: np.ndarray, b: np.ndarray, r: float) -> np.ndarray:
    """Area of the disc ``x^2 + y^2 <= r^2`` inside ``{x <= a, y <= b}``."""
    a = np.clip(a, -r, r)
    b = np.clip(b, -r, r)
    xb = np.sqrt(np.maximum(r * r - b * b, 0.0))

    def S(x):
        # int_{-r}^{x} sqrt(r^2 - t^2) dt
        s = np.sqrt(np.maximum(r * r - x * x, 0.0))
        return 0.5 * (x * s + r * r * np.arcsin(np.clip(x / r, -1.0, 1.0))) + math.pi * r * r / 4

    t1 = np.clip(a, -r, -xb)
    t2 = np.clip(a, -xb, xb)
    t3 = np.clip(a, xb, r)
    upper_part = 2 * S(t1) + b * (t2 + xb) + S(t2) - S(-xb) + 2 * (S(t3) - S(xb))
    lower_part = b * (t2 + xb) + S(t2) - S(-xb)
    return np.where(b >= 0, upper_part, lower_part)


def disc_rect_area(x0, x1, y0, y1, r: float) -> np.ndarray:
    """Exact area of ``[x0,x1] x [y0,y1]`` intersected with the disc of radius r at 0."""
    return (
        _disc_quadrant(x1, y1, r)
        - _disc_quadrant(x0, y1, r)
        - _disc_quadrant(x1, y0, r)
        + _disc_quadrant(x0, y0, r)
    )


def _axis_range(grid: Grid, k: int, a: float, b: float) -> np.ndarray:
    lo, h, m = grid.lower[k], grid.h, grid.shape[k]
    i0 = max(0, int(math.floor((a - lo) / h - 0.5)) - 1)
    i1 = min(m - 1, int(math.ceil((b - lo) / h + 0.5)) + 1)
    return np.arange(i0, i1 + 1) if i1 >= i0 else np.arange(0)


def _axis_cells(grid: Grid, k: int, idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x = grid.lower[k] + grid.h * idx
    lo = np.maximum(x - grid.h / 2, grid.lower[k])
    hi = np.minimum(x + grid.h / 2, grid.upper[k])
    return lo, hi


def region_weights(grid: Grid, region: Region = None) -> tuple[np.ndarray, np.ndarray]:
    """Flat node indices and covered cell measures for ``region ∩ box``.

    Only nodes with positive covered measure are returned.
    """
    if region is None:
        w = grid.cell_volumes()
        return np.arange(grid.size), w
    if region.n != grid.n:
        raise ValueError("region dimension does not match the grid")
    c = region.center
    half = region.radius if isinstance(region, Ball) else region.side / 2
    ranges = [_axis_range(grid, k, c[k] - half, c[k] + half) for k in range(grid.n)]
    if any(r.size == 0 for r in ranges):
        return np.arange(0), np.zeros(0)
    cells = [_axis_cells(grid, k, ranges[k]) for k in range(grid.n)]
    if grid.n == 1:
        w = _interval_overlap(cells[0][0], cells[0][1], c[0] - half, c[0] + half)
        idx = ranges[0]
    elif isinstance(region, Cube):
        wx = _interval_overlap(cells[0][0], cells[0][1], c[0] - half, c[0] + half)
        wy = _interval_overlap(cells[1][0], cells[1][1], c[1] - half, c[1] + half)
        w = np.outer(wx, wy).ravel()
        idx = np.ravel_multi_index(np.meshgrid(ranges[0], ranges[1], indexing="ij"), grid.shape).ravel()
    else:
        x0 = cells[0][0][:, None] - c[0]
        x1 = cells[0][1][:, None] - c[0]
        y0 = cells[1][0][None, :] - c[1]
        y1 = cells[1][1][None, :] - c[1]
        w = disc_rect_area(x0, x1, y0, y1, region.radius).ravel()
        w = np.clip(w, 0.0, None)
        idx = np.ravel_multi_index(np.meshgrid(ranges[0], ranges[1], indexing="ij"), grid.shape).ravel()
    keep = w > 0
    return idx[keep], w[keep]


def region_measure(grid: Grid, region: Region = None) -> float:
    """``|region ∩ box|`` as seen by the quadrature."""
    return float(region_weights(grid, region)[1].sum())


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real function sampled at the nodes of a grid (row-major order).

    ``source`` is the callable the samples came from, when known; it lets
    the same function be resampled on a refined grid.
    """

    grid: Grid
    values: np.ndarray
    source: Callable | None = field(default=None, repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).reshape(-1)
        if v.size != self.grid.size:
            raise ValueError(f"expected {self.grid.size} values, got {v.size}")
        if not np.all(np.isfinite(v)):
            raise ValueError("non-finite input")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_callable(cls, grid: Grid, fn: Callable) -> "GridFunction":
        """Sample ``fn`` on the nodes; ``fn`` receives an ``(size, n)`` array
        (or a flat array when n == 1)."""
        return cls(grid, _sample(grid, fn), fn)

    @classmethod
    def constant(cls, grid: Grid, c: float) -> "GridFunction":
        return cls(grid, np.full(grid.size, float(c)), _Constant(float(c)))

    @classmethod
    def zeros(cls, grid: Grid) -> "GridFunction":
        return cls.constant(grid, 0.0)

    def on(self, grid: Grid) -> "GridFunction":
        """Resample onto another grid (requires a known source)."""
        if grid == self.grid:
            return self
        if self.source is None:
            raise ValueError("cannot resample a GridFunction without a source callable")
        return type(self).from_callable(grid, self.source)

    def _new(self, values, source=None) -> "GridFunction":
        return GridFunction(self.grid, values, source)

    def _check(self, other: "GridFunction"):
        if other.grid != self.grid:
            raise ValueError("grid mismatch")

    def __add__(self, other):
        if isinstance(other, GridFunction):
            self._check(other)
            return self._new(self.values + other.values, _combine(np.add, self.source, other.source))
        return self._new(self.values + other, _combine(np.add, self.source, _Constant(other)))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, GridFunction):
            self._check(other)
            return self._new(self.values - other.values, _combine(np.subtract, self.source, other.source))
        return self._new(self.values - other, _combine(np.subtract, self.source, _Constant(other)))

    def __mul__(self, other):
        if isinstance(other, GridFunction):
            self._check(other)
            return self._new(self.values * other.values, _combine(np.multiply, self.source, other.source))
        return self._new(self.values * other, _combine(np.multiply, self.source, _Constant(other)))

    __rmul__ = __mul__

    def __truediv__(self, c: float):
        return self * (1.0 / c)

    def __neg__(self):
        return self * -1.0

    def __abs__(self):
        return self.map(np.abs)

    def map(self, fn: Callable[[np.ndarray], np.ndarray]) -> "GridFunction":
        src = None if self.source is None else _Compose(fn, self.source)
        return self._new(fn(self.values), src)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def reshape(self) -> np.ndarray:
        return self.values.reshape(self.grid.shape)


class _Constant:
    def __init__(self, c: float):
        self.c = float(c)

    def __call__(self, x):
        x = np.asarray(x)
        return np.full(x.shape[0], self.c)


class _Compose:
    def __init__(self, outer, inner):
        self.outer, self.inner = outer, inner

    def __call__(self, x):
        return self.outer(np.asarray(self.inner(x), dtype=float))


class _Binary:
    def __init__(self, op, a, b):
        self.op, self.a, self.b = op, a, b

    def __call__(self, x):
        return self.op(np.asarray(self.a(x), dtype=float), np.asarray(self.b(x), dtype=float))


def _combine(op, a, b):
    if a is None or b is None:
        return None
    return _Binary(op, a, b)


def _sample(grid: Grid, fn: Callable) -> np.ndarray:
    pts = grid.coords()
    arg = pts[:, 0] if grid.n == 1 else pts
    vals = np.asarray(fn(arg), dtype=float)
    return np.broadcast_to(vals, (grid.size,)).copy()


def integrate(f: GridFunction, region: Region = None) -> float:
    """Quadrature of ``f`` over ``region ∩ box`` (whole grid when region is None).

    Returns 0 when the region misses the box.
    """
    if not np.all(np.isfinite(f.values)):
        raise ValueError("non-finite input")
    idx, w = region_weights(f.grid, region)
    return float(np.dot(f.values[idx], w))


def region_average(f: GridFunction, region: Region) -> float:
    idx, w = region_weights(f.grid, region)
    m = w.sum()
    if not m > 0:
        raise ValueError("degenerate region")
    return float(np.dot(f.values[idx], w) / m)


def indicator(grid: Grid, region: Region, complement: bool = False) -> np.ndarray:
    """Closed nodal indicator of ``region`` (boundary nodes count as inside)."""
    if region is None:
        mask = np.ones(grid.size, dtype=bool)
    else:
        mask = region.contains(grid.coords())
    return ~mask if complement else mask


def restrict(f: GridFunction, region: Region, complement: bool = False) -> GridFunction:
    mask = indicator(f.grid, region, complement)
    src = None
    if f.source is not None and region is not None:
        src = _Restricted(f.source, region, complement)
    elif f.source is not None:
        src = f.source if not complement else _Constant(0.0)
    return GridFunction(f.grid, np.where(mask, f.values, 0.0), src)


class _Restricted:
    def __init__(self, fn, region, complement):
        self.fn, self.region, self.complement = fn, region, complement

    def __call__(self, x):
        pts = np.asarray(x, dtype=float)
        pts2 = pts[:, None] if pts.ndim == 1 else pts
        mask = self.region.contains(pts2)
        if self.complement:
            mask = ~mask
        return np.where(mask, np.asarray(self.fn(x), dtype=float), 0.0)


def dyadic_radii(grid: Grid, r_min: float | None = None, r_max: float | None = None) -> list[float]:
    """Dyadic radii ``2^k`` from ``r_min`` (default 2h) up to ``r_max``
    (default the box half-width)."""
    r_min = 2 * grid.h if r_min is None else r_min
    r_max = grid.half_width if r_max is None else r_max
    k0 = math.ceil(math.log2(r_min) - 1e-9)
    k1 = math.floor(math.log2(r_max) + 1e-9)
    return [2.0**k for k in range(k0, k1 + 1)]


def _centers(grid: Grid, stride: int) -> np.ndarray:
    axes = [ax[::stride] for ax in grid.axes()]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def ball_family(
    grid: Grid,
    stride: int = 4,
    radii: Iterable[float] | None = None,
    inside: bool = False,
) -> list[Ball]:
    """Balls centred on every ``stride``-th node with dyadic radii.

    With ``inside=True`` only balls contained in the box are kept.
    """
    radii = dyadic_radii(grid) if radii is None else list(radii)
    out = []
    for c in _centers(grid, stride):
        for r in radii:
            if inside and any(
                c[k] - r < grid.lower[k] - 1e-12 or c[k] + r > grid.upper[k] + 1e-12 for k in range(grid.n)
            ):
                continue
            out.append(Ball(tuple(c), r))
    return out


def cube_family(
    grid: Grid,
    stride: int = 4,
    sides: Iterable[float] | None = None,
    inside: bool = True,
) -> list[Cube]:
    sides = [2 * r for r in dyadic_radii(grid)] if sides is None else list(sides)
    out = []
    for c in _centers(grid, stride):
        for s in sides:
            if inside and any(
                c[k] - s / 2 < grid.lower[k] - 1e-12 or c[k] + s / 2 > grid.upper[k] + 1e-12
                for k in range(grid.n)
            ):
                continue
            out.append(Cube(tuple(c), s))
    return out


# CSV interchange: "# key=value" header lines, then one value per line.

def _fmt(v: float) -> str:
    return "inf" if math.isinf(v) else repr(float(v))


def write_csv(path, grid: Grid, values: np.ndarray) -> None:
    lines = [
        f"# n={grid.n}",
        "# lower=" + ",".join(repr(v) for v in grid.lower),
        "# upper=" + ",".join(repr(v) for v in grid.upper),
        f"# h={grid.h!r}",
    ]
    lines.extend(_fmt(v) for v in np.asarray(values, dtype=float).ravel())
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path) -> tuple[Grid, np.ndarray]:
    header: dict[str, str] = {}
    values = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                header[key.strip()] = val.strip()
            else:
                values.append(float(line))
    missing = {"n", "lower", "upper", "h"} - header.keys()
    if missing:
        raise ValueError(f"CSV header is missing {sorted(missing)}")
    n = int(header["n"])
    grid = Grid(
        n,
        tuple(float(v) for v in header["lower"].split(",")),
        tuple(float(v) for v in header["upper"].split(",")),
        float(header["h"]),
    )
    arr = np.array(values)
    if arr.size != grid.size:
        raise ValueError(f"CSV has {arr.size} values, grid needs {grid.size}")
    return grid, arr


def save_grid_function(path, f: GridFunction) -> None:
    write_csv(path, f.grid, f.values)


def load_grid_function(path) -> GridFunction:
    grid, arr = read_csv(path)
    return GridFunction(grid, arr)
