"""Linear operators: Hardy-Littlewood and sharp maximal functions, the
Riesz potential, and linear commutators."""

from __future__ import annotations

from typing import Callable, Iterable, Sequence

import numpy as np

from ..geometry import Ball, Grid, GridFunction, dyadic_radii, region_weights
from ..weights import PowerTag, power_box_integral
from .bilinear import node_of


def _cumulative(grid: Grid, v: np.ndarray):
    """Cell boundaries and the running integral of the piecewise-constant
    cell function in 1D."""
    x = grid.axes()[0]
    edges = np.concatenate([[grid.lower[0]], 0.5 * (x[1:] + x[:-1]), [grid.upper[0]]])
    cum = np.concatenate([[0.0], np.cumsum(v * np.diff(edges))])
    return edges, cum


def _interval_averages(grid: Grid, v: np.ndarray, centers: np.ndarray, r: float) -> np.ndarray:
    edges, cum = _cumulative(grid, v)
    a = np.clip(centers - r, grid.lower[0], grid.upper[0])
    b = np.clip(centers + r, grid.lower[0], grid.upper[0])
    mass = np.interp(b, edges, cum) - np.interp(a, edges, cum)
    return mass / (b - a)


def hl_maximal(
    f: GridFunction,
    radii: Sequence[float] | None = None,
    balls: Iterable[Ball] | None = None,
) -> GridFunction:
    """Maximal averages of |f|.

    Centred form (default): at each node, max over balls B(x, r), r in
    ``radii`` (dyadic from 2h by default).  Uncentred form (``balls``
    given): at each node, max over the family balls containing it.
    """
    grid = f.grid
    v = np.abs(f.values)
    if balls is not None:
        out = np.zeros(grid.size)
        pts = grid.coords()
        any_ball = False
        for B in balls:
            any_ball = True
            idx, w = region_weights(grid, B)
            m = w.sum()
            if m <= 0:
                continue
            avg = float(np.dot(v[idx], w) / m)
            inside = B.contains(pts)
            out[inside] = np.maximum(out[inside], avg)
        if not any_ball:
            raise ValueError("empty ball family")
        return GridFunction(grid, out)
    radii = dyadic_radii(grid) if radii is None else list(radii)
    if not radii:
        raise ValueError("empty radius family")
    out = np.zeros(grid.size)
    if grid.n == 1:
        x = grid.axes()[0]
        for r in radii:
            out = np.maximum(out, _interval_averages(grid, v, x, r))
    else:
        pts = grid.coords()
        for i, c in enumerate(pts):
            for r in radii:
                idx, w = region_weights(grid, Ball(tuple(c), r))
                out[i] = max(out[i], float(np.dot(v[idx], w) / w.sum()))
    return GridFunction(grid, out)


def node_balls(grid: Grid, radii: Sequence[float] | None = None, stride: int = 1) -> list[Ball]:
    """Balls centred at every ``stride``-th node with the given radii."""
    radii = dyadic_radii(grid) if radii is None else list(radii)
    pts = grid.coords()
    if grid.n == 1:
        pts = pts[::stride]
    else:
        m = grid.shape
        keep = [(i % stride == 0 and j % stride == 0) for i in range(m[0]) for j in range(m[1])]
        pts = pts[np.array(keep)]
    return [Ball(tuple(c), r) for c in pts for r in radii]


def sharp_maximal(
    f: GridFunction,
    delta: float = 1.0,
    radii: Sequence[float] | None = None,
    balls: Iterable[Ball] | None = None,
    stride: int = 1,
    signed: bool = False,
) -> GridFunction:
    """M#_delta f = (max over family balls containing x of the mean
    oscillation of |f|^delta on the ball)^(1/delta).

    With ``signed=True`` (delta = 1 only) the oscillation of f itself is
    used, which is the plain sharp maximal function of a signed f."""
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    if signed and delta != 1:
        raise ValueError("signed sharp maximal function needs delta = 1")
    grid = f.grid
    F = f.values if signed else np.abs(f.values) ** delta
    family = list(balls) if balls is not None else node_balls(grid, radii, stride)
    if not family:
        raise ValueError("empty ball family")
    pts = grid.coords()
    out = np.zeros(grid.size)
    for B in family:
        idx, w = region_weights(grid, B)
        m = w.sum()
        if m <= 0:
            continue
        avg = float(np.dot(F[idx], w) / m)
        osc = float(np.dot(np.abs(F[idx] - avg), w) / m)
        inside = B.contains(pts)
        out[inside] = np.maximum(out[inside], osc)
    return GridFunction(grid, out ** (1.0 / delta))


def _riesz_table_1d(offsets: np.ndarray, h: float, alpha: float) -> np.ndarray:
    """Exact integrals of |u|^(alpha-1) over the cells [(k -+ 1/2) h], divided by h."""
    a = (offsets - 0.5) * h
    b = (offsets + 0.5) * h

    def F(x):
        return np.sign(x) * np.abs(x) ** alpha / alpha

    return (F(b) - F(a)) / h


def riesz_potential(f: GridFunction, alpha: float, targets: Sequence[int] | None = None) -> np.ndarray:
    """I_alpha f(x) = int f(y) |x - y|^(alpha - n) dy at the target nodes.

    In 1D each cell carries the exact integral of the kernel; in 2D the
    singular cell uses the exact cell integral and the rest the nodal rule.
    """
    grid = f.grid
    n = grid.n
    if not 0 < alpha < n:
        raise ValueError("Riesz order must satisfy 0 < alpha < n")
    targets = np.arange(grid.size) if targets is None else np.asarray(targets, dtype=np.int64).ravel()
    cw = grid.cell_volumes()
    F = f.values * cw
    S = np.flatnonzero(F)
    out = np.zeros(targets.size)
    if S.size == 0:
        return out
    tm = np.stack(np.unravel_index(targets, grid.shape), axis=-1)
    sm = np.stack(np.unravel_index(S, grid.shape), axis=-1)
    h = grid.h
    if n == 1:
        D = tm[:, 0][:, None] - sm[:, 0][None, :]
        out = _riesz_table_1d(D.astype(float), h, alpha) @ F[S]
        return out
    centre = power_box_integral(PowerTag(1.0, alpha - n), (-h / 2, -h / 2), (h / 2, h / 2)) / h**2
    for k0 in range(0, targets.size, 256):
        D = (tm[k0 : k0 + 256, None, :] - sm[None, :, :]) * h
        r = np.sqrt(np.sum(D * D, axis=-1))
        with np.errstate(divide="ignore"):
            Kt = np.where(r > 0, r ** (alpha - n), centre)
        out[k0 : k0 + 256] = Kt @ F[S]
    return out


def singular_integral(
    f: GridFunction,
    omega: Callable[[np.ndarray], np.ndarray],
    eps: float,
    targets: Sequence[int] | None = None,
) -> np.ndarray:
    """Truncated linear singular integral with kernel Omega(y/|y|) / |y|^n,
    over |x - y| > eps (cell centres)."""
    grid = f.grid
    if eps < grid.h * (1 - 1e-12):
        raise ValueError("truncation below grid resolution")
    targets = np.arange(grid.size) if targets is None else np.asarray(targets, dtype=np.int64).ravel()
    pts = grid.coords()
    F = f.values * grid.cell_volumes()
    S = np.flatnonzero(F)
    out = np.zeros(targets.size)
    for k0 in range(0, targets.size, 256):
        D = pts[targets[k0 : k0 + 256], None, :] - pts[None, S, :]
        r = np.sqrt(np.sum(D * D, axis=-1))
        with np.errstate(divide="ignore", invalid="ignore"):
            sig = D / r[..., None]
            Kt = np.where(r > eps, np.asarray(omega(sig)) / r**grid.n, 0.0)
        out[k0 : k0 + 256] = np.nan_to_num(Kt) @ F[S]
    return out


def odd_omega(sig: np.ndarray) -> np.ndarray:
    """Omega(sigma) = sigma_1 (the Hilbert kernel in 1D)."""
    return sig[..., 0]


def linear_commutator(
    b: GridFunction,
    f: GridFunction,
    kind: str,
    x,
    alpha: float | None = None,
    eps: float | None = None,
    omega: Callable | None = None,
) -> float:
    """b(x) T f(x) - T(b f)(x) for the Riesz potential (``kind='riesz'``) or
    the truncated singular integral (``kind='singular'``)."""
    if b.grid != f.grid:
        raise ValueError("grid mismatch")
    t = node_of(f.grid, x)
    tg = np.array([t])
    if kind == "riesz":
        if alpha is None:
            raise ValueError("riesz commutator needs alpha")
        op = lambda v: riesz_potential(v, alpha, tg)[0]
    elif kind == "singular":
        if eps is None:
            raise ValueError("singular commutator needs eps")
        om = odd_omega if omega is None else omega
        op = lambda v: singular_integral(v, om, eps, tg)[0]
    else:
        raise ValueError(f"unknown commutator kind {kind!r}")
    return float(b.values[t] * op(f) - op(b * f))
