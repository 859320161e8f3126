"""Deterministic input families: Gaussians times polynomials, indicators,
power bumps and the BMO test families."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..geometry import Cube, Grid, GridFunction


def _radius(x: np.ndarray, center) -> np.ndarray:
    c = np.asarray(center, dtype=float)
    if x.ndim == 1:
        return np.abs(x - c.reshape(-1)[0])
    return np.linalg.norm(x - c, axis=-1)


class GaussPoly:
    """exp(-|x-c|^2 / s^2) * (1 + a * (x-c)_1 / s), optionally cut to zero
    beyond ``cutoff`` widths."""

    def __init__(self, center, width: float, tilt: float = 0.0, cutoff: float | None = None):
        self.center, self.width, self.tilt, self.cutoff = center, width, tilt, cutoff

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        c = np.asarray(self.center, dtype=float)
        d1 = (x - c.reshape(-1)[0]) if x.ndim == 1 else (x[:, 0] - c[0])
        r = _radius(x, c)
        v = np.exp(-((r / self.width) ** 2)) * (1 + self.tilt * d1 / self.width)
        if self.cutoff is not None:
            v = np.where(r <= self.cutoff * self.width, v, 0.0)
        return v


class RegionIndicator:
    def __init__(self, region):
        self.region = region

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        pts = x[:, None] if x.ndim == 1 else x
        return self.region.contains(pts).astype(float)


class PowerBump:
    """|x - c|^(-beta) on B(c, r), capped at the value at distance h/2."""

    def __init__(self, center, beta: float, radius: float, cap_at: float):
        self.center, self.beta, self.radius, self.cap_at = center, beta, radius, cap_at

    def __call__(self, x):
        r = _radius(np.asarray(x, dtype=float), self.center)
        rr = np.maximum(r, self.cap_at)
        return np.where(r <= self.radius, rr ** (-self.beta), 0.0)


class Dipole:
    """chi_Q - chi_Q' for two disjoint equal cubes (mean zero)."""

    def __init__(self, q1: Cube, q2: Cube):
        self.q1, self.q2 = q1, q2

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        pts = x[:, None] if x.ndim == 1 else x
        return self.q1.contains(pts).astype(float) - self.q2.contains(pts).astype(float)


class SignedLogTruncated:
    """sign(x_1) * min(k, log(1/|x|)) (unbounded BMO norm as k grows)."""

    def __init__(self, k: float):
        self.k = k

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        r = np.abs(x) if x.ndim == 1 else np.linalg.norm(x, axis=-1)
        s = np.sign(x) if x.ndim == 1 else np.sign(x[:, 0])
        with np.errstate(divide="ignore"):
            lg = np.where(r > 0, np.log(1.0 / np.where(r > 0, r, 1.0)), np.inf)
        return s * np.minimum(self.k, lg)


class LogTruncated:
    """max(log|x|, -k): truncated log, uniformly in BMO."""

    def __init__(self, k: float):
        self.k = k

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        r = np.abs(x) if x.ndim == 1 else np.linalg.norm(x, axis=-1)
        with np.errstate(divide="ignore"):
            return np.maximum(np.log(np.where(r > 0, r, 0.0)), -self.k)


class Spike:
    """height * chi_[c - 1/(2 height), c + 1/(2 height)]: unit mass spike."""

    def __init__(self, center: float, height: float):
        self.center, self.height = center, height

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        d = np.abs(x - self.center) if x.ndim == 1 else np.linalg.norm(x - self.center, axis=-1)
        return np.where(d <= 0.5 / self.height, self.height, 0.0)


def gaussian_family(grid: Grid, centers: Sequence, widths: Sequence[float], tilts=(0.0, 0.5)) -> list[tuple[str, GridFunction]]:
    out = []
    for c in centers:
        for w in widths:
            for a in tilts:
                out.append((f"gauss(c={c},w={w},a={a})", GridFunction.from_callable(grid, GaussPoly(c, w, a))))
    return out


def indicator_family(grid: Grid, regions) -> list[tuple[str, GridFunction]]:
    return [(f"chi({r})", GridFunction.from_callable(grid, RegionIndicator(r))) for r in regions]


def power_bump_family(grid: Grid, center, betas: Sequence[float], radius: float) -> list[tuple[str, GridFunction]]:
    return [
        (f"power(beta={b},r={radius})", GridFunction.from_callable(grid, PowerBump(center, b, radius, grid.h / 2)))
        for b in betas
    ]


def bmo_growth_family(grid: Grid, ks: Sequence[float]) -> list[GridFunction]:
    return [GridFunction.from_callable(grid, SignedLogTruncated(k)) for k in ks]


def bmo_plateau_family(grid: Grid, ks: Sequence[float]) -> list[GridFunction]:
    return [GridFunction.from_callable(grid, LogTruncated(k)) for k in ks]


def random_pairs(grid: Grid, count: int, seed: int = 0) -> list[tuple[str, GridFunction, GridFunction]]:
    """Seeded random Gaussian-polynomial pairs inside the middle half of the box."""
    rng = np.random.default_rng(seed)
    lo, hi = np.asarray(grid.lower), np.asarray(grid.upper)
    mid, half = (lo + hi) / 2, (hi - lo) / 4
    out = []
    for i in range(count):
        c1 = tuple(mid + half * rng.uniform(-1, 1, size=grid.n))
        c2 = tuple(mid + half * rng.uniform(-1, 1, size=grid.n))
        w1, w2 = rng.uniform(0.1, 1.0, size=2) * float(half.min())
        a1, a2 = rng.uniform(-1, 1, size=2)
        f = GridFunction.from_callable(grid, GaussPoly(c1 if grid.n > 1 else c1[0], w1, a1))
        g = GridFunction.from_callable(grid, GaussPoly(c2 if grid.n > 1 else c2[0], w2, a2))
        out.append((f"random[{i}]", f, g))
    return out
