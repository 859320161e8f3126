"""Weights, Muckenhoupt-type constants and the Morrey weight-profile class.

Every constant here is a maximum over a declared finite family of cubes or
balls, so the values are lower bounds for the continuum suprema.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import integrate as _quad

from .geometry import Ball, Cube, Grid, GridFunction, Region, region_weights


@dataclass(frozen=True)
class PowerTag:
    """Closed form ``c * |x|^a``."""

    c: float
    a: float

    def __pow__(self, s: float) -> "PowerTag":
        return PowerTag(self.c**s, self.a * s)

    def __mul__(self, other: "PowerTag") -> "PowerTag":
        return PowerTag(self.c * other.c, self.a + other.a)

    def scale(self, k: float) -> "PowerTag":
        return PowerTag(self.c * k, self.a)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        r = np.abs(x) if x.ndim == 1 else np.linalg.norm(x, axis=-1)
        with np.errstate(divide="ignore"):
            return self.c * r**self.a


# analytic integrals of |x|^g over boxes


def _power_1d(a: float, b: float, g: float) -> float:
    """int_a^b |x|^g dx for g > -1."""

    def F(x):
        return math.copysign(abs(x) ** (g + 1) / (g + 1), x)

    return F(b) - F(a)


def _radial_factor(k: float, g: float) -> float:
    if k <= 0:
        return 0.0
    return _quad.quad(lambda s: (1.0 + s * s) ** (g / 2), 0.0, k, epsabs=0, epsrel=1e-13, limit=200)[0]


def _quadrant_rect(A: float, B: float, g: float) -> float:
    """int_0^A int_0^B (x^2+y^2)^{g/2} dy dx for A, B >= 0, g > -2."""
    if A <= 0 or B <= 0:
        return 0.0
    return (A ** (g + 2) * _radial_factor(B / A, g) + B ** (g + 2) * _radial_factor(A / B, g)) / (g + 2)


def _power_rect(x0: float, x1: float, y0: float, y1: float, g: float) -> float:
    def G(a, b):
        return math.copysign(1.0, a) * math.copysign(1.0, b) * _quadrant_rect(abs(a), abs(b), g)

    return G(x1, y1) - G(x0, y1) - G(x1, y0) + G(x0, y0)


def power_box_integral(tag: PowerTag, lower: Sequence[float], upper: Sequence[float]) -> float:
    """Exact integral of a tagged power weight over an axis-aligned box."""
    if len(lower) == 1:
        return tag.c * _power_1d(lower[0], upper[0], tag.a)
    return tag.c * _power_rect(lower[0], upper[0], lower[1], upper[1], tag.a)


def _node_values(grid: Grid, tag: PowerTag) -> np.ndarray:
    pts = grid.coords()
    r = np.linalg.norm(pts, axis=-1)
    vals = np.empty(grid.size)
    near = r < 1e-12
    with np.errstate(divide="ignore"):
        vals[~near] = tag.c * r[~near] ** tag.a
    # the node sitting on the singularity carries its cell average
    for i in np.flatnonzero(near):
        lo = np.maximum(pts[i] - grid.h / 2, grid.lower)
        hi = np.minimum(pts[i] + grid.h / 2, grid.upper)
        vals[i] = power_box_integral(tag, lo, hi) / float(np.prod(hi - lo))
    return vals


@dataclass(frozen=True, eq=False)
class Weight(GridFunction):
    """Strictly positive grid function, optionally tagged ``c * |x|^a``."""

    tag: PowerTag | None = None

    def __post_init__(self):
        super().__post_init__()
        if np.any(self.values <= 0):
            raise ValueError("weight must be positive")

    @classmethod
    def power(cls, grid: Grid, a: float, c: float = 1.0) -> "Weight":
        if a <= -grid.n:
            raise ValueError("power weight |x|^a needs a > -n to be locally integrable")
        tag = PowerTag(float(c), float(a))
        return cls(grid, _node_values(grid, tag), tag, tag)

    @classmethod
    def from_callable(cls, grid: Grid, fn: Callable) -> "Weight":
        pts = grid.coords()
        arg = pts[:, 0] if grid.n == 1 else pts
        vals = np.broadcast_to(np.asarray(fn(arg), dtype=float), (grid.size,)).copy()
        return cls(grid, vals, fn, None)

    @classmethod
    def unit(cls, grid: Grid) -> "Weight":
        return cls.power(grid, 0.0, 1.0)

    @classmethod
    def of(cls, f: GridFunction) -> "Weight":
        return cls(f.grid, f.values, f.source, None)

    def on(self, grid: Grid) -> "Weight":
        if grid == self.grid:
            return self
        if self.tag is not None:
            return Weight.power(grid, self.tag.a, self.tag.c)
        if self.source is None:
            raise ValueError("cannot resample a weight without a source callable")
        return Weight.from_callable(grid, self.source)

    def __pow__(self, s: float) -> "Weight":
        # nodal values are powered directly so that discrete dual pairings
        # stay exact; the tag keeps region measures analytic
        tag = None if self.tag is None else self.tag**s
        src = tag if tag is not None else (None if self.source is None else _Pow(self.source, s))
        return Weight(self.grid, self.values**s, src, tag)

    def __mul__(self, other):
        if isinstance(other, Weight):
            self._check(other)
            tag = None if self.tag is None or other.tag is None else self.tag * other.tag
            src = None if self.source is None or other.source is None else _Prod(self.source, other.source)
            return Weight(self.grid, self.values * other.values, tag or src, tag)
        if isinstance(other, GridFunction):
            return GridFunction.__mul__(self, other)
        k = float(other)
        if k > 0:
            tag = None if self.tag is None else self.tag.scale(k)
            src = None if self.source is None else _Prod(self.source, _Scalar(k))
            return Weight(self.grid, self.values * k, tag or src, tag)
        return GridFunction.__mul__(self, other)

    __rmul__ = __mul__

    def measure(self, region: Region = None, clip: bool = True) -> float:
        """w(region); exact for tagged weights on intervals and cubes.

        With ``clip=False`` the region is not intersected with the grid box
        (only available in closed form)."""
        return weight_measure(self, region, clip)

    def average(self, region: Region) -> float:
        idx, w = region_weights(self.grid, region)
        m = w.sum()
        if not m > 0:
            raise ValueError("degenerate region")
        return self.measure(region) / m


class _Pow:
    def __init__(self, fn, s):
        self.fn, self.s = fn, s

    def __call__(self, x):
        return np.asarray(self.fn(x), dtype=float) ** self.s


class _Scalar:
    def __init__(self, k):
        self.k = k

    def __call__(self, x):
        return self.k


class _Prod:
    def __init__(self, a, b):
        self.a, self.b = a, b

    def __call__(self, x):
        return np.asarray(self.a(x), dtype=float) * np.asarray(self.b(x), dtype=float)


def _region_box(region, grid: Grid | None):
    c = np.asarray(region.center)
    half = region.radius if isinstance(region, Ball) else region.side / 2
    lo, hi = c - half, c + half
    if grid is not None:
        lo = np.maximum(lo, grid.lower)
        hi = np.minimum(hi, grid.upper)
    return lo, hi


def weight_measure(w: Weight, region: Region = None, clip: bool = True) -> float:
    if region is None:
        if w.tag is not None:
            return power_box_integral(w.tag, w.grid.lower, w.grid.upper)
        return float(np.dot(w.values, w.grid.cell_volumes()))
    box_shaped = w.grid.n == 1 or isinstance(region, Cube)
    if w.tag is not None and box_shaped:
        lo, hi = _region_box(region, w.grid if clip else None)
        if np.any(hi <= lo):
            return 0.0
        return power_box_integral(w.tag, lo, hi)
    if w.tag is not None and not clip and isinstance(region, Ball) and np.allclose(region.center, 0):
        # origin-centred disc: 2*pi*c*r^(a+2)/(a+2)
        return 2 * math.pi * w.tag.c * region.radius ** (w.tag.a + 2) / (w.tag.a + 2)
    if not clip:
        raise ValueError("unclipped measure is only available in closed form")
    idx, cw = region_weights(w.grid, region)
    return float(np.dot(w.values[idx], cw))


# Muckenhoupt-type constants


def _cube_avgs(w: Weight, cubes: Iterable[Cube]):
    for Q in cubes:
        yield Q, w.average(Q)


def _require_family(cubes) -> list:
    cubes = list(cubes)
    if not cubes:
        raise ValueError("empty region family")
    return cubes


@dataclass(frozen=True)
class WeightConstant:
    value: float
    argmax: Cube | Ball
    per_region: tuple[float, ...]

    def __float__(self):
        return self.value


def _best(vals: list[float], regions: list) -> WeightConstant:
    k = int(np.argmax(vals))
    return WeightConstant(float(vals[k]), regions[k], tuple(vals))


def ap_constant(w: Weight, p: float, cubes: Iterable[Cube]) -> WeightConstant:
    """max over cubes of avg(w) * avg(w^(1-p'))^(p-1)."""
    if p <= 1:
        raise ValueError("A_p constant needs p > 1")
    cubes = _require_family(cubes)
    pp = p / (p - 1)
    dual = w ** (1 - pp)
    vals = [w.average(Q) * dual.average(Q) ** (p - 1) for Q in cubes]
    return _best(vals, cubes)


def apq_constant(w: Weight, p: float, q: float, cubes: Iterable[Cube]) -> WeightConstant:
    """max over cubes of avg(w^q)^(1/q) * avg(w^(-p'))^(1/p')."""
    if not 1 < p < q < math.inf:
        raise ValueError("A_(p,q) constant needs 1 < p < q < inf")
    cubes = _require_family(cubes)
    pp = p / (p - 1)
    wq, wd = w**q, w ** (-pp)
    vals = [wq.average(Q) ** (1 / q) * wd.average(Q) ** (1 / pp) for Q in cubes]
    return _best(vals, cubes)


def multiple_weight_constant(
    w1: Weight, w2: Weight, p1: float, p2: float, q: float | None, cubes: Iterable[Cube]
) -> WeightConstant:
    """Vector-weight constant: the A_P class when ``q`` is None, the
    off-diagonal A_(P,q) class (with nu = w1*w2) otherwise."""
    if not (p1 > 1 and p2 > 1):
        raise ValueError("multiple weight constant needs p1, p2 > 1")
    cubes = _require_family(cubes)
    p1d, p2d = p1 / (p1 - 1), p2 / (p2 - 1)
    if q is None:
        p = 1.0 / (1 / p1 + 1 / p2)
        wstar = (w1 ** (p / p1)) * (w2 ** (p / p2))
        d1, d2 = w1 ** (1 - p1d), w2 ** (1 - p2d)
        vals = [
            wstar.average(Q) ** (1 / p) * d1.average(Q) ** (1 / p1d) * d2.average(Q) ** (1 / p2d)
            for Q in cubes
        ]
    else:
        if q <= 0:
            raise ValueError("q must be positive")
        nu_q = (w1 * w2) ** q
        d1, d2 = w1 ** (-p1d), w2 ** (-p2d)
        vals = [
            nu_q.average(Q) ** (1 / q) * d1.average(Q) ** (1 / p1d) * d2.average(Q) ** (1 / p2d)
            for Q in cubes
        ]
    return _best(vals, cubes)


def reverse_holder_ratio(
    w1: Weight,
    w2: Weight,
    p1: float,
    p2: float,
    region: Ball | Cube,
    mode: str = "product",
    q: float | None = None,
) -> float:
    """Bilinear reverse-Hölder ratio on one region.

    ``product``: w*(B) / prod w_i(B)^(p/p_i) with w* = w1^(p/p1) w2^(p/p2).
    ``q-power``: the same with w_i replaced by w_i^(q_i), where p1, p2 play
    the role of q1, q2 and q = 1/(1/q1 + 1/q2).
    """
    if mode == "q-power":
        w1, w2 = w1**p1, w2**p2
    elif mode != "product":
        raise ValueError(f"unknown reverse-Hölder mode {mode!r}")
    p = 1.0 / (1 / p1 + 1 / p2)
    if q is not None and mode == "q-power" and abs(q - p) > 1e-12:
        raise ValueError("q must equal 1/(1/q1 + 1/q2)")
    wstar = (w1 ** (p / p1)) * (w2 ** (p / p2))
    return wstar.measure(region) / (w1.measure(region) ** (p / p1) * w2.measure(region) ** (p / p2))


# Morrey weight profiles u(y, r)


@dataclass(frozen=True, eq=False)
class WeightProfile:
    """u(y, r) > 0 for balls B(y, r).

    kinds: ``power`` (c r^lam), ``base_norm`` (||chi_B||_X^theta),
    ``measure`` (w(B)^kappa), ``tabulated`` ({(y, r): u}).
    """

    kind: str
    c: float = 1.0
    lam: float = 0.0
    theta: float = 1.0
    kappa: float = 0.0
    space: object = None
    weight: Weight | None = None
    table: dict = field(default_factory=dict)
    clip: bool = False

    def __post_init__(self):
        if self.kind not in ("power", "base_norm", "measure", "tabulated"):
            raise ValueError(f"unknown profile kind {self.kind!r}")
        if self.kind == "base_norm" and self.space is None:
            raise ValueError("base_norm profile needs a base space")
        if self.kind == "measure" and self.weight is None:
            raise ValueError("measure profile needs a weight")

    @classmethod
    def power(cls, lam: float, c: float = 1.0) -> "WeightProfile":
        return cls("power", c=c, lam=lam)

    @classmethod
    def base_norm(cls, space, theta: float = 1.0, clip: bool = False) -> "WeightProfile":
        return cls("base_norm", space=space, theta=theta, clip=clip)

    @classmethod
    def measure(cls, weight: Weight, kappa: float, clip: bool = False) -> "WeightProfile":
        return cls("measure", weight=weight, kappa=kappa, clip=clip)

    @classmethod
    def tabulated(cls, table: dict) -> "WeightProfile":
        clean = {(_key(y), float(r)): float(v) for (y, r), v in table.items()}
        if any(v <= 0 for v in clean.values()):
            raise ValueError("profile values must be positive")
        return cls("tabulated", table=clean)

    def __call__(self, ball: Ball) -> float:
        if self.kind == "power":
            val = self.c * ball.radius**self.lam
        elif self.kind == "base_norm":
            val = self.space.indicator_norm(ball, clip=self.clip) ** self.theta
        elif self.kind == "measure":
            try:
                m = self.weight.measure(ball, clip=self.clip)
            except ValueError:
                m = self.weight.measure(ball, clip=True)
            val = m**self.kappa
        else:
            key = (_key(ball.center), float(ball.radius))
            if key not in self.table:
                raise KeyError(f"profile has no value at {key}")
            val = self.table[key]
        if not val > 0:
            raise ValueError(f"profile value must be positive, got {val} at {ball}")
        return float(val)

    def on(self, grid: Grid) -> "WeightProfile":
        if self.kind == "base_norm":
            return WeightProfile.base_norm(self.space.on(grid), self.theta, self.clip)
        if self.kind == "measure":
            return WeightProfile.measure(self.weight.on(grid), self.kappa, self.clip)
        return self

    def describe(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == "power":
            d.update(c=self.c, lam=self.lam)
        elif self.kind == "base_norm":
            d.update(theta=self.theta, space=repr(self.space))
        elif self.kind == "measure":
            d.update(kappa=self.kappa, weight_tag=repr(self.weight.tag))
        else:
            d.update(entries=len(self.table))
        return d


def _key(y) -> tuple:
    return tuple(round(float(v), 12) for v in np.atleast_1d(y))


def classical_morrey_profile(space, p: float, q: float) -> WeightProfile:
    """u = |B|^(1/q - 1/p) written as ||chi_B||_{L^q}^(1 - q/p)."""
    if not q <= p:
        raise ValueError("classical Morrey profile needs q <= p")
    return WeightProfile.base_norm(space, theta=1.0 - q / p)


def weighted_morrey_profile(weight: Weight, k: float, p: float) -> WeightProfile:
    """u = w(B)^(k/p)."""
    if not 0 < k < 1:
        raise ValueError("weighted Morrey index k must lie in (0, 1)")
    return WeightProfile.measure(weight, k / p)


# W-class certificate


@dataclass
class WClassCertificate:
    alpha: float
    strengthened: bool
    c13: float
    c14: float
    c15: float
    c24: float | None
    doubling: float
    last_term_ratio: float
    partial_sums: list[float]
    partial_sums_24: list[float] | None
    J: int
    verdict: str
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "strengthened": self.strengthened,
            "c13_min_u_large_r": self.c13,
            "c14_max_indicator_over_u_small_r": self.c14,
            "c15_max_tail_sum_over_u": self.c15,
            "c24_max_weighted_tail_sum_over_u": self.c24,
            "doubling": self.doubling,
            "last_term_ratio": self.last_term_ratio,
            "partial_sums": self.partial_sums,
            "partial_sums_24": self.partial_sums_24,
            "J": self.J,
            "verdict": self.verdict,
            "notes": self.notes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def w_class_check(
    u: WeightProfile,
    X,
    alpha: float,
    strengthened: bool = False,
    centers: Sequence | None = None,
    r0: float = 2.0**-4,
    levels: int = 8,
    J: int = 8,
) -> WClassCertificate:
    """Measure the admissibility conditions of a Morrey weight profile.

    Samples (y, r) with r = r0 * 2^i, i < levels, and truncates the tail
    series after J terms.  The series start at j = 0.  Indicator norms are
    taken unclipped when the base space has them in closed form.
    """
    if J < 4:
        raise ValueError("series truncation unreliable")
    n = X.n
    if not 0 <= alpha < 2 * n:
        raise ValueError("alpha must lie in [0, 2n)")
    if centers is None:
        centers = [tuple([0.0] * n)]
    centers = [tuple(float(v) for v in np.atleast_1d(c)) for c in centers]
    radii = [r0 * 2.0**i for i in range(levels)]
    notes = [
        "tail series evaluated from j = 0 as in the definition; proofs sum from j = 1",
        "constants are maxima over sampled (y, r): lower bounds for the continuum values",
    ]
    clipped = False

    def chi(ball):
        nonlocal clipped
        try:
            return X.indicator_norm(ball, clip=False)
        except ValueError:
            clipped = True
            return X.indicator_norm(ball, clip=True)

    c13 = math.inf
    c14 = 0.0
    doubling = 0.0
    c15 = 0.0
    c24 = 0.0
    worst = None
    worst24 = None
    last_ratio = 0.0
    usable = J
    for y in centers:
        for r in radii:
            B = Ball(y, r)
            uB = u(B)
            if r >= 1:
                c13 = min(c13, uB)
            else:
                c14 = max(c14, chi(B) / uB)
            doubling = max(doubling, u(B.dilate(2)) / uB)
            cB = chi(B)
            terms = []
            for j in range(J):
                big = B.dilate(2.0 ** (j + 1))
                t = 2.0 ** ((j + 1) * alpha) * cB / chi(big) * u(big) / uB
                if not math.isfinite(t):
                    break
                terms.append(t)
            usable = min(usable, len(terms))
            if len(terms) < 4:
                raise ValueError("series truncation unreliable")
            sums = np.cumsum(terms)
            if sums[-1] > c15:
                c15 = float(sums[-1])
                worst = sums.tolist()
            last_ratio = max(last_ratio, terms[-1] / terms[-2])
            if strengthened:
                s24 = np.cumsum([(j + 1) * t for j, t in enumerate(terms)])
                if s24[-1] > c24:
                    c24 = float(s24[-1])
                    worst24 = s24.tolist()
    if not any(r >= 1 for r in radii):
        notes.append("no sampled radius >= 1: lower-bound condition not exercised")
        c13 = math.nan
    if clipped:
        notes.append("some indicator norms were clipped to the grid box")
    ok = last_ratio < 1.0 and (math.isnan(c13) or c13 > 0) and math.isfinite(c14) and math.isfinite(doubling)
    return WClassCertificate(
        alpha=alpha,
        strengthened=strengthened,
        c13=c13,
        c14=c14,
        c15=c15,
        c24=c24 if strengthened else None,
        doubling=doubling,
        last_term_ratio=last_ratio,
        partial_sums=worst or [],
        partial_sums_24=worst24 if strengthened else None,
        J=usable,
        verdict="pass" if ok else "fail",
        notes=notes,
    )
