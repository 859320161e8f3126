"""Bilinear operators on grid data: truncated integrals, the bilinear
fractional integral, the ball-decomposed extended operator, commutators and
the cube averaging operator."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..geometry import Ball, Cube, Grid, GridFunction, indicator, region_weights
from .backend import get_backend
from .kernels import BilinearKernel, fractional_kernel

_TARGET_CHUNK = 128
_SOURCE_BLOCK = 1024


def _multi_index(grid: Grid, flat: np.ndarray) -> np.ndarray:
    return np.stack(np.unravel_index(flat, grid.shape), axis=-1).astype(np.int64)


def node_of(grid: Grid, x) -> int:
    """Flat node index for ``x`` given as an index (int) or a point."""
    if isinstance(x, (int, np.integer)):
        if not 0 <= x < grid.size:
            raise ValueError("node index out of range")
        return int(x)
    return grid.node_index(x)


def pair_count(grid: Grid, f: GridFunction, g: GridFunction, targets: int) -> int:
    """Number of kernel evaluations a pair sum over the supports costs."""
    return int(targets) * int(np.count_nonzero(f.values)) * int(np.count_nonzero(g.values))


def pair_sum(
    K: BilinearKernel,
    fvals: np.ndarray,
    gvals: np.ndarray,
    grid: Grid,
    targets: np.ndarray,
    eps: float,
    mode: str = "joint",
    b: np.ndarray | None = None,
    slot: int = 0,
    backend: str | None = None,
) -> np.ndarray:
    """sum over cells (y1, y2) of K(x - y1, x - y2) f(y1) g(y2) |cell|^2 for
    every target node, excluding pairs whose centres lie in the truncation
    region (|x-y1|^2 + |x-y2|^2 <= eps^2, or both |x-yi| <= eps in product
    mode).  ``slot`` in {1, 2} inserts the factor b(x) - b(y_slot)."""
    if K.n != grid.n:
        raise ValueError("kernel and grid dimensions differ")
    if mode not in ("joint", "product"):
        raise ValueError(f"unknown truncation mode {mode!r}")
    _, lattice_sum = get_backend(backend)
    targets = np.asarray(targets, dtype=np.int64).ravel()
    cw = grid.cell_volumes()
    F = np.asarray(fvals, dtype=float) * cw
    G = np.asarray(gvals, dtype=float) * cw
    S1 = np.flatnonzero(F)
    S2 = np.flatnonzero(G)
    out = np.zeros(targets.size)
    if S1.size == 0 or S2.size == 0 or targets.size == 0:
        return out
    if slot not in (0, 1, 2):
        raise ValueError("slot must be 0, 1 or 2")
    bv = np.zeros(grid.size) if b is None else np.asarray(b, dtype=float)
    if slot and b is None:
        raise ValueError("commutator slot needs b")
    h = grid.h
    eps2 = float(eps) ** 2
    tm_all = _multi_index(grid, targets)
    s1m_all = _multi_index(grid, S1)
    s2m_all = _multi_index(grid, S2)
    for t0 in range(0, targets.size, _TARGET_CHUNK):
        tsl = slice(t0, t0 + _TARGET_CHUNK)
        tm = tm_all[tsl]
        bx = np.ascontiguousarray(bv[targets[tsl]])
        acc = np.zeros(tm.shape[0])
        for i0 in range(0, S1.size, _SOURCE_BLOCK):
            s1 = slice(i0, i0 + _SOURCE_BLOCK)
            D1 = tm[:, None, :] - s1m_all[s1][None, :, :]
            lo1 = D1.reshape(-1, grid.n).min(axis=0)
            ext1 = D1.reshape(-1, grid.n).max(axis=0) - lo1 + 1
            o1 = _flatten(D1 - lo1, ext1)
            a1 = _box_offsets(lo1, ext1)
            r1 = np.ascontiguousarray(np.sum(D1 * D1, axis=-1) * h * h, dtype=float)
            for j0 in range(0, S2.size, _SOURCE_BLOCK):
                s2 = slice(j0, j0 + _SOURCE_BLOCK)
                D2 = tm[:, None, :] - s2m_all[s2][None, :, :]
                lo2 = D2.reshape(-1, grid.n).min(axis=0)
                ext2 = D2.reshape(-1, grid.n).max(axis=0) - lo2 + 1
                o2 = _flatten(D2 - lo2, ext2)
                a2 = _box_offsets(lo2, ext2)
                r2 = np.ascontiguousarray(np.sum(D2 * D2, axis=-1) * h * h, dtype=float)
                table = K.table(a1, a2, h)
                acc += lattice_sum(
                    table,
                    o1,
                    o2,
                    r1,
                    r2,
                    np.ascontiguousarray(F[S1[s1]]),
                    np.ascontiguousarray(G[S2[s2]]),
                    eps2,
                    mode == "product",
                    bx,
                    np.ascontiguousarray(bv[S1[s1]]),
                    np.ascontiguousarray(bv[S2[s2]]),
                    int(slot),
                )
        out[tsl] = acc
    return out


def _flatten(D: np.ndarray, ext: np.ndarray) -> np.ndarray:
    if D.shape[-1] == 1:
        return np.ascontiguousarray(D[..., 0], dtype=np.int64)
    return np.ascontiguousarray(D[..., 0] * ext[1] + D[..., 1], dtype=np.int64)


def _box_offsets(lo: np.ndarray, ext: np.ndarray) -> np.ndarray:
    axes = [lo[k] + np.arange(ext[k]) for k in range(lo.size)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _check_pair(f: GridFunction, g: GridFunction):
    if f.grid != g.grid:
        raise ValueError("grid mismatch")


def _check_eps(grid: Grid, eps: float):
    if eps < grid.h * (1 - 1e-12):
        raise ValueError("truncation below grid resolution")


def truncated_bilinear(
    f: GridFunction,
    g: GridFunction,
    K: BilinearKernel,
    eps: float,
    x,
    mode: str = "joint",
    backend: str | None = None,
) -> float:
    """T_eps(f, g)(x): the kernel integral outside the truncation region."""
    _check_pair(f, g)
    _check_eps(f.grid, eps)
    t = node_of(f.grid, x)
    return float(pair_sum(K, f.values, g.values, f.grid, np.array([t]), eps, mode, backend=backend)[0])


def truncated_bilinear_field(
    f: GridFunction,
    g: GridFunction,
    K: BilinearKernel,
    eps: float,
    targets: Sequence[int] | None = None,
    mode: str = "joint",
    backend: str | None = None,
) -> np.ndarray:
    """T_eps(f, g) at every target node (all nodes by default)."""
    _check_pair(f, g)
    _check_eps(f.grid, eps)
    targets = np.arange(f.grid.size) if targets is None else np.asarray(targets)
    return pair_sum(K, f.values, g.values, f.grid, targets, eps, mode, backend=backend)


def maximal_truncated(
    f: GridFunction,
    g: GridFunction,
    K: BilinearKernel,
    x,
    ladder: Sequence[float],
    mode: str = "joint",
) -> float:
    """max over the epsilon ladder of |T_eps(f, g)(x)|."""
    ladder = list(ladder)
    if not ladder:
        raise ValueError("empty epsilon ladder")
    if any(b >= a for a, b in zip(ladder, ladder[1:])):
        raise ValueError("epsilon ladder must be strictly decreasing")
    return max(abs(truncated_bilinear(f, g, K, e, x, mode)) for e in ladder)


def bilinear_fractional(
    f: GridFunction,
    g: GridFunction,
    alpha: float,
    targets: Sequence[int] | None = None,
    backend: str | None = None,
) -> np.ndarray:
    """I_alpha(f, g) at the target nodes (all nodes by default).

    The cell holding the double singularity y1 = y2 = x contributes the
    exact cell integral of the kernel times f(x) g(x)."""
    _check_pair(f, g)
    n = f.grid.n
    if not 0 < alpha < 2 * n:
        raise ValueError("fractional order must satisfy 0 < alpha < 2n")
    K = fractional_kernel(alpha, n)
    targets = np.arange(f.grid.size) if targets is None else np.asarray(targets, dtype=np.int64).ravel()
    vals = pair_sum(K, f.values, g.values, f.grid, targets, 0.0, backend=backend)
    centre = K.centre_cell_integral(f.grid.h)
    return vals + centre * f.values[targets] * g.values[targets]


# extended operator


def _ball_contains(B: Ball, point) -> bool:
    return bool(B.contains(np.atleast_2d(np.asarray(point, dtype=float)))[0])


@dataclass(frozen=True)
class ExtendedTerms:
    local: float
    outer: float
    cross_1: float
    cross_2: float

    @property
    def total(self) -> float:
        return self.local + self.outer + self.cross_1 + self.cross_2


def local_epsilon(grid: Grid, floor: float = 0.0) -> float:
    return max(grid.h, floor)


def extended_bilinear_terms(
    f: GridFunction,
    g: GridFunction,
    K: BilinearKernel,
    B: Ball,
    x,
    eps: float | None = None,
    b: GridFunction | None = None,
    slot: int = 0,
    mode: str = "joint",
    backend: str | None = None,
) -> ExtendedTerms:
    """The four terms of the ball-decomposed operator at x in B: the
    truncated local part on 2B data and the three tail integrals over
    (R^n \\ 2B)^2, 2B x (R^n \\ 2B) and (R^n \\ 2B) x 2B."""
    _check_pair(f, g)
    grid = f.grid
    t = node_of(grid, x)
    if not _ball_contains(B, grid.node(t)):
        raise ValueError("point outside ball")
    eps = local_epsilon(grid) if eps is None else eps
    _check_eps(grid, eps)
    B2 = B.dilate(2)
    inside = indicator(grid, B2)
    f_in, f_out = np.where(inside, f.values, 0.0), np.where(inside, 0.0, f.values)
    g_in, g_out = np.where(inside, g.values, 0.0), np.where(inside, 0.0, g.values)
    bv = None if b is None else b.values
    tg = np.array([t])

    def run(fv, gv, e):
        return float(pair_sum(K, fv, gv, grid, tg, e, mode, bv, slot, backend)[0])

    return ExtendedTerms(
        local=run(f_in, g_in, eps),
        outer=run(f_out, g_out, 0.0),
        cross_1=run(f_in, g_out, 0.0),
        cross_2=run(f_out, g_in, 0.0),
    )


def extended_bilinear(
    f: GridFunction,
    g: GridFunction,
    K: BilinearKernel,
    B: Ball,
    x,
    eps: float | None = None,
    tails: Iterable[str] = ("outer", "cross_1", "cross_2"),
    mode: str = "joint",
    backend: str | None = None,
) -> float:
    """Ball-decomposed operator at x in B.  ``tails`` selects which tail
    terms are added (all three by default)."""
    terms = extended_bilinear_terms(f, g, K, B, x, eps, mode=mode, backend=backend)
    return terms.local + sum(getattr(terms, name) for name in tails)


def bilinear_commutator(
    b: GridFunction,
    slot: int,
    f: GridFunction,
    g: GridFunction,
    K: BilinearKernel,
    eps: float,
    x,
    path: str = "kernel",
    mode: str = "joint",
    backend: str | None = None,
) -> float:
    """Commutator in slot 1 or 2 at truncation eps.

    ``path='difference'``: b(x) T(f, g) - T(.., b f_slot, ..);
    ``path='kernel'``: the kernel carries the factor b(x) - b(y_slot)."""
    _check_pair(f, g)
    if slot not in (1, 2):
        raise ValueError("slot must be 1 or 2")
    _check_eps(f.grid, eps)
    t = node_of(f.grid, x)
    tg = np.array([t])
    grid = f.grid
    if path == "kernel":
        return float(pair_sum(K, f.values, g.values, grid, tg, eps, mode, b.values, slot, backend)[0])
    if path != "difference":
        raise ValueError(f"unknown commutator path {path!r}")
    plain = pair_sum(K, f.values, g.values, grid, tg, eps, mode, backend=backend)[0]
    if slot == 1:
        moved = pair_sum(K, b.values * f.values, g.values, grid, tg, eps, mode, backend=backend)[0]
    else:
        moved = pair_sum(K, f.values, b.values * g.values, grid, tg, eps, mode, backend=backend)[0]
    return float(b.values[t] * plain - moved)


def bilinear_commutator_field(
    b: GridFunction,
    slot: int,
    f: GridFunction,
    g: GridFunction,
    K: BilinearKernel,
    eps: float,
    targets: Sequence[int] | None = None,
    mode: str = "joint",
    backend: str | None = None,
) -> np.ndarray:
    _check_pair(f, g)
    if slot not in (1, 2):
        raise ValueError("slot must be 1 or 2")
    _check_eps(f.grid, eps)
    targets = np.arange(f.grid.size) if targets is None else np.asarray(targets)
    return pair_sum(K, f.values, g.values, f.grid, targets, eps, mode, b.values, slot, backend)


def extended_bilinear_commutator(
    b: GridFunction,
    slot: int,
    f: GridFunction,
    g: GridFunction,
    K: BilinearKernel,
    B: Ball,
    x,
    eps: float | None = None,
    mode: str = "joint",
    backend: str | None = None,
) -> float:
    """Ball-decomposed commutator: every term carries b(x) - b(y_slot)."""
    if slot not in (1, 2):
        raise ValueError("slot must be 1 or 2")
    return extended_bilinear_terms(f, g, K, B, x, eps, b=b, slot=slot, mode=mode, backend=backend).total


def averaging_operator(f: GridFunction, g: GridFunction, Q: Cube, alpha: float) -> GridFunction:
    """|Q|^(alpha/n) avg_Q f avg_Q g chi_Q."""
    _check_pair(f, g)
    grid = f.grid
    idx, w = region_weights(grid, Q)
    m = w.sum()
    if not m > 0:
        raise ValueError("degenerate region")
    af = float(np.dot(f.values[idx], w) / m)
    ag = float(np.dot(g.values[idx], w) / m)
    scale = Q.measure ** (alpha / grid.n)
    return GridFunction(grid, scale * af * ag * indicator(grid, Q).astype(float))
