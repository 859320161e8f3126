"""Base Banach function spaces, associate norms, Morrey-Banach norms and
BMO-type norms on grid data."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .exponents import ExponentFunction, _luxemburg, conjugate, dual_exponent
from .geometry import (
    Ball,
    Cube,
    Grid,
    GridFunction,
    Region,
    ball_measure,
    region_weights,
)
from .weights import Weight, WeightProfile, weight_measure


def _values(f) -> np.ndarray:
    return f.values if isinstance(f, GridFunction) else np.asarray(f, dtype=float)


def _region_measure_unclipped(region) -> float:
    if isinstance(region, Ball):
        return ball_measure(region.radius, region.n)
    return region.side**region.n


class BaseSpace:
    """Common interface of the concrete base spaces."""

    grid: Grid | None = None

    @property
    def n(self) -> int:
        return self.grid.n

    def norm(self, f, region: Region = None) -> float:
        raise NotImplementedError

    def associate(self) -> "BaseSpace":
        raise NotImplementedError

    def indicator_norm(self, region: Region, clip: bool = True) -> float:
        if not clip:
            raise ValueError("unclipped indicator norm not available in closed form")
        return self.norm(np.ones(self.grid.size), region)

    def on(self, grid: Grid) -> "BaseSpace":
        raise NotImplementedError

    def extremizer(self, g: np.ndarray) -> np.ndarray | None:
        """A function f making the pairing with g (nearly) extremal, if known."""
        return None


@dataclass(frozen=True, eq=False)
class Lebesgue(BaseSpace):
    """L^p with Lebesgue measure; p < 1 gives the quasi-norm (not a B.f.s.)."""

    p: float
    grid: Grid | None = None

    def __post_init__(self):
        if not self.p > 0:
            raise ValueError("Lebesgue exponent must be positive")

    @property
    def n(self) -> int:
        return self.grid.n if self.grid is not None else 1

    def norm(self, f, region: Region = None) -> float:
        grid = f.grid if isinstance(f, GridFunction) else self.grid
        v = np.abs(_values(f))
        if not np.all(np.isfinite(v)):
            raise ValueError("non-finite input")
        idx, w = region_weights(grid, region)
        if idx.size == 0:
            return 0.0
        if math.isinf(self.p):
            return float(v[idx].max())
        return float(np.dot(v[idx] ** self.p, w)) ** (1.0 / self.p)

    def associate(self) -> "Lebesgue":
        if self.p < 1:
            raise ValueError("L^p with p < 1 has a trivial associate space")
        return Lebesgue(conjugate(self.p), self.grid)

    def indicator_norm(self, region: Region, clip: bool = True) -> float:
        if math.isinf(self.p):
            return 1.0
        if clip:
            m = float(region_weights(self.grid, region)[1].sum())
        else:
            m = _region_measure_unclipped(region)
        return m ** (1.0 / self.p)

    def on(self, grid: Grid) -> "Lebesgue":
        return Lebesgue(self.p, grid)

    def extremizer(self, g):
        g = np.abs(g)
        if math.isinf(self.p):
            return np.ones_like(g)
        if self.p == 1:
            return (g >= g.max()).astype(float)
        return g ** (1.0 / (self.p - 1))

    def __repr__(self):
        return f"Lebesgue(p={self.p})"


@dataclass(frozen=True, eq=False)
class WeightedLebesgue(BaseSpace):
    """(int |f|^p w)^(1/p); for p = inf the norm is max |f| w."""

    p: float
    w: Weight

    def __post_init__(self):
        if not self.p >= 1:
            raise ValueError("weighted Lebesgue exponent must be >= 1")

    @property
    def grid(self) -> Grid:
        return self.w.grid

    def norm(self, f, region: Region = None) -> float:
        v = np.abs(_values(f))
        if not np.all(np.isfinite(v)):
            raise ValueError("non-finite input")
        idx, cw = region_weights(self.grid, region)
        if idx.size == 0:
            return 0.0
        if math.isinf(self.p):
            return float(np.max(v[idx] * self.w.values[idx]))
        return float(np.dot(v[idx] ** self.p, self.w.values[idx] * cw)) ** (1.0 / self.p)

    def associate(self) -> "WeightedLebesgue":
        if self.p == 1:
            return WeightedLebesgue(math.inf, self.w ** (-1.0))
        if math.isinf(self.p):
            return WeightedLebesgue(1.0, self.w ** (-1.0))
        pp = conjugate(self.p)
        return WeightedLebesgue(pp, self.w ** (1.0 - pp))

    def indicator_norm(self, region: Region, clip: bool = True) -> float:
        if math.isinf(self.p):
            if not clip:
                raise ValueError("unclipped sup norm not available")
            idx, _ = region_weights(self.grid, region)
            return float(self.w.values[idx].max())
        return weight_measure(self.w, region, clip) ** (1.0 / self.p)

    def on(self, grid: Grid) -> "WeightedLebesgue":
        return WeightedLebesgue(self.p, self.w.on(grid))

    def extremizer(self, g):
        g = np.abs(g)
        if self.p == 1:
            r = g / self.w.values
            return (r >= r.max()).astype(float)
        if math.isinf(self.p):
            return 1.0 / self.w.values
        return (g / self.w.values) ** (1.0 / (self.p - 1))

    def __repr__(self):
        return f"WeightedLebesgue(p={self.p}, tag={self.w.tag})"


@dataclass(frozen=True, eq=False)
class VariableLebesgue(BaseSpace):
    """L^{p(.)} with the Luxemburg norm.

    ``associate_rule='exact'`` gives the exact associate norm on the grid
    measure space; ``'conjugate'`` uses the Luxemburg norm of p'(.), which
    is equivalent up to a factor 2.
    """

    p: ExponentFunction
    associate_rule: str = "exact"
    rtol: float = 1e-8

    def __post_init__(self):
        if self.associate_rule not in ("exact", "conjugate"):
            raise ValueError(f"unknown associate rule {self.associate_rule!r}")

    @property
    def grid(self) -> Grid:
        return self.p.grid

    @property
    def equivalence_constant(self) -> float:
        return 1.0 if self.associate_rule == "exact" else 2.0

    def norm(self, f, region: Region = None) -> float:
        v = np.abs(_values(f))
        if not np.all(np.isfinite(v)):
            raise ValueError("non-finite input")
        idx, w = region_weights(self.grid, region)
        if idx.size == 0:
            return 0.0
        return _luxemburg(v, self.p, idx, w, self.rtol, float(w.sum()))

    def associate(self) -> BaseSpace:
        if self.associate_rule == "exact":
            return VariableAssociate(self.p)
        return VariableLebesgue(dual_exponent(self.p), "conjugate", self.rtol)

    def on(self, grid: Grid) -> "VariableLebesgue":
        return VariableLebesgue(self.p.on(grid), self.associate_rule, self.rtol)

    def extremizer(self, g):
        """Candidates at the optimal scale of the exact associate norm.

        On p = 1 nodes where |g| reaches the scale, and on p = inf nodes, the
        Young-equality profile is only determined up to a free amplitude, so
        a small ladder of amplitudes is returned."""
        g = np.abs(g)
        pv = self.p.values
        _, t = amemiya_norm(g, pv, self.grid.cell_volumes(), return_scale=True)
        base = np.zeros_like(g)
        mid = np.isfinite(pv) & (pv > 1)
        if t > 0:
            pd = pv[mid] / (pv[mid] - 1)
            base[mid] = (g[mid] / (t * pv[mid])) ** (pd - 1)
        one = (pv == 1.0) & (g >= t * (1 - 1e-9)) & (g > 0)
        inf = np.isinf(pv)
        if not one.any() and not inf.any():
            return [base]
        amps = [0.0] + list(np.geomspace(1e-3, 1e3, 25))
        out = []
        for a in amps if one.any() else [0.0]:
            for c in amps if inf.any() else [0.0]:
                cand = base.copy()
                cand[one] = a
                cand[inf] = c
                if cand.any():
                    out.append(cand)
        return out

    def __repr__(self):
        return f"VariableLebesgue(p in [{self.p.p_minus}, {self.p.p_plus}], rule={self.associate_rule})"


@dataclass(frozen=True, eq=False)
class VariableAssociate(BaseSpace):
    """Exact associate norm of L^{p(.)} on the grid:
    inf over k > 0 of (1 + rho*(k g)) / k, rho* the conjugate modular."""

    p: ExponentFunction

    @property
    def grid(self) -> Grid:
        return self.p.grid

    def norm(self, f, region: Region = None) -> float:
        g = np.abs(_values(f))
        if not np.all(np.isfinite(g)):
            raise ValueError("non-finite input")
        idx, w = region_weights(self.grid, region)
        g, pv = g[idx], self.p.values[idx]
        if idx.size == 0 or not np.any(g > 0):
            return 0.0
        return amemiya_norm(g, pv, w)

    def associate(self) -> VariableLebesgue:
        return VariableLebesgue(self.p, "exact")

    def on(self, grid: Grid) -> "VariableAssociate":
        return VariableAssociate(self.p.on(grid))

    def __repr__(self):
        return f"VariableAssociate(p in [{self.p.p_minus}, {self.p.p_plus}])"


def amemiya_norm(g: np.ndarray, pv: np.ndarray, w: np.ndarray, return_scale: bool = False):
    """inf_{t>0} t (1 + rho*(g / t)) for the conjugate of the modular
    sum w |f|^p (p finite) + max |f| (p = inf)."""
    inf = np.isinf(pv)
    one = pv == 1.0
    mid = ~inf & ~one
    gm, pm, wm = g[mid], pv[mid], w[mid]
    pd = pm / (pm - 1.0)
    coef = (pm - 1.0) * pm ** (-pd) * wm
    # constraints: |g|/t <= 1 on p = 1 nodes, int_{p=inf} |g|/t <= 1
    t_min = 0.0
    if one.any():
        t_min = max(t_min, float(g[one].max()))
    if inf.any():
        t_min = max(t_min, float(np.dot(g[inf], w[inf])))
    if gm.size == 0 or not np.any(gm > 0):
        return (t_min, t_min) if return_scale else t_min

    pos = gm > 0
    gm, pd, coef = gm[pos], pd[pos], coef[pos]
    lg = np.log(gm)

    def G(s):
        t = math.exp(s)
        return t * (1.0 + float(np.sum(coef * np.exp(pd * (lg - s)))))

    # G(t) >= t, so the minimiser lies below G at any feasible point
    t0 = max(t_min, float(np.max(gm)) * 1e-3, 1e-300)
    hi = math.log(max(G(math.log(t0)), t0) * (1 + 1e-12))
    lo = math.log(t_min) if t_min > 0 else hi - 60.0
    if hi <= lo:
        best = (G(lo), math.exp(lo))
    else:
        res = minimize_scalar(G, bounds=(lo, hi), method="bounded", options={"xatol": 1e-11, "maxiter": 500})
        best = min((float(res.fun), math.exp(res.x)), (G(lo), math.exp(lo)), (G(hi), math.exp(hi)))
    return best if return_scale else best[0]


def base_norm(f, X: BaseSpace, region: Region = None) -> float:
    return X.norm(f, region)


class AssociateCrossCheckError(AssertionError):
    pass


def pairing_sup(f: GridFunction, X: BaseSpace, family: Sequence[np.ndarray], region: Region = None) -> float:
    """max over g in the family of int |f g| / ||g||_X."""
    idx, w = region_weights(f.grid, region)
    fv = np.abs(f.values)
    best = 0.0
    for g in family:
        g = np.abs(np.asarray(g, dtype=float))
        ng = X.norm(g, region)
        if ng > 0:
            best = max(best, float(np.dot(fv[idx] * g[idx], w)) / ng)
    return best


def _test_family(f: GridFunction, X: BaseSpace) -> list[np.ndarray]:
    grid = f.grid
    fam = []
    ext = X.extremizer(np.abs(f.values))
    if isinstance(ext, list):
        fam.extend(ext)
    elif ext is not None:
        fam.append(ext)
    fam.append(np.ones(grid.size))
    pts = grid.coords()
    center = 0.5 * (np.asarray(grid.lower) + np.asarray(grid.upper))
    width = grid.half_width
    for s in (0.05, 0.1, 0.25, 0.5, 1.0):
        d2 = np.sum((pts - center) ** 2, axis=-1)
        fam.append(np.exp(-d2 / (s * width) ** 2))
        fam.append((np.sqrt(d2) <= s * width).astype(float))
    return fam


def associate_norm(
    f: GridFunction,
    X: BaseSpace,
    cross_check: bool = False,
    region: Region = None,
    tol: float = 1e-6,
) -> float:
    """Associate-space norm of f.  With ``cross_check`` the pairing
    supremum over a test family must lie in [value / K, value * (1 + tol)]."""
    Xa = X.associate()
    value = Xa.norm(f, region)
    if cross_check:
        K = getattr(X, "equivalence_constant", 1.0)
        sup = pairing_sup(f, X, _test_family(f, X), region)
        if sup > value * (1 + tol) * (K if K > 1 else 1.0) + 1e-300:
            raise AssociateCrossCheckError(f"pairing sup {sup} exceeds associate norm {value}")
        if sup < value / K * (1 - 1e-3):
            raise AssociateCrossCheckError(f"pairing sup {sup} below associate norm {value} / K={K}")
    return value


# Morrey-Banach norms


@dataclass(frozen=True, eq=False)
class MorreySpace:
    base: BaseSpace
    profile: WeightProfile
    balls: tuple

    def __post_init__(self):
        object.__setattr__(self, "balls", tuple(self.balls))

    def on(self, grid: Grid, balls: Iterable[Ball] | None = None) -> "MorreySpace":
        return MorreySpace(self.base.on(grid), self.profile.on(grid), tuple(balls) if balls else self.balls)

    def norm(self, f, region: Region = None) -> float:
        return morrey_norm(f, self)

    @property
    def grid(self) -> Grid:
        return self.base.grid


@dataclass(frozen=True)
class MorreyValue:
    value: float
    ball: Ball

    def __float__(self):
        return self.value


def morrey_norm(f: GridFunction, M: MorreySpace, return_argmax: bool = False):
    """max over the declared balls of ||chi_B f||_X / u(B)."""
    if not M.balls:
        raise ValueError("empty ball family")
    best, arg = -1.0, None
    for B in M.balls:
        v = M.base.norm(f, B) / M.profile(B)
        if v > best:
            best, arg = v, B
    return MorreyValue(best, arg) if return_argmax else best


# BMO norms


def _oscillation(b: GridFunction, region) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    idx, w = region_weights(b.grid, region)
    m = w.sum()
    if not m > 0:
        raise ValueError("degenerate region")
    avg = float(np.dot(b.values[idx], w) / m)
    return idx, w, b.values[idx] - avg


def bmo_norm(b: GridFunction, regions: Iterable[Ball | Cube], return_argmax: bool = False):
    """max over the family of the mean of |b - b_B| on B."""
    regions = list(regions)
    if not regions:
        raise ValueError("empty region family")
    best, arg = 0.0, regions[0]
    for R in regions:
        idx, w, d = _oscillation(b, R)
        v = float(np.dot(np.abs(d), w) / w.sum())
        if v > best:
            best, arg = v, R
    return (best, arg) if return_argmax else best


def bmo_x_norm(b: GridFunction, X: BaseSpace, regions: Iterable[Ball | Cube]) -> float:
    """max over the family of ||chi_B (b - b_B)||_X / ||chi_B||_X."""
    regions = list(regions)
    if not regions:
        raise ValueError("empty region family")
    best = 0.0
    for R in regions:
        idx, w, d = _oscillation(b, R)
        full = np.zeros(b.grid.size)
        full[idx] = d
        best = max(best, X.norm(full, R) / X.indicator_norm(R))
    return best
