"""Variable exponents p(.): modular, Luxemburg norm, conjugates and
log-Hölder certificates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .geometry import Cube, Grid, GridFunction, Region, read_csv, region_weights, write_csv


@dataclass(frozen=True, eq=False)
class ExponentFunction:
    """Exponent p(x) in [1, inf] sampled on a grid; ``inf`` marks the
    nodes where the modular takes an ess sup instead of an integral."""

    grid: Grid
    values: np.ndarray
    p_inf: float | None = None
    source: Callable | None = field(default=None, repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).reshape(-1)
        if v.size != self.grid.size:
            raise ValueError(f"expected {self.grid.size} values, got {v.size}")
        if np.any(np.isnan(v)) or np.any(v < 1.0):
            raise ValueError("exponent values must lie in [1, inf]")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_callable(cls, grid: Grid, fn: Callable, p_inf: float | None = None) -> "ExponentFunction":
        pts = grid.coords()
        arg = pts[:, 0] if grid.n == 1 else pts
        vals = np.broadcast_to(np.asarray(fn(arg), dtype=float), (grid.size,)).copy()
        return cls(grid, vals, p_inf, fn)

    @classmethod
    def constant(cls, grid: Grid, q: float) -> "ExponentFunction":
        return cls(grid, np.full(grid.size, float(q)), float(q), _ConstExp(float(q)))

    def on(self, grid: Grid) -> "ExponentFunction":
        if grid == self.grid:
            return self
        if self.source is None:
            raise ValueError("cannot resample an exponent without a source callable")
        return type(self).from_callable(grid, self.source, self.p_inf)

    @property
    def p_minus(self) -> float:
        return float(self.values.min())

    @property
    def p_plus(self) -> float:
        return float(self.values.max())

    @property
    def infinite(self) -> np.ndarray:
        return np.isinf(self.values)

    def reciprocal(self) -> np.ndarray:
        """1/p with 1/inf = 0."""
        with np.errstate(divide="ignore"):
            return np.where(self.infinite, 0.0, 1.0 / self.values)


class _ConstExp:
    def __init__(self, q):
        self.q = q

    def __call__(self, x):
        return np.full(np.asarray(x).shape[0], self.q)


def _check_grid(f: GridFunction, p: ExponentFunction):
    if f.grid != p.grid:
        raise ValueError("grid mismatch between function and exponent")


def _modular_values(absf: np.ndarray, p: ExponentFunction, idx: np.ndarray, w: np.ndarray) -> float:
    pv = p.values[idx]
    fv = absf[idx]
    inf = np.isinf(pv)
    finite = ~inf
    total = float(np.dot(fv[finite] ** pv[finite], w[finite])) if finite.any() else 0.0
    if inf.any():
        total += float(fv[inf].max())
    return total


def modular(f: GridFunction, p: ExponentFunction, region: Region = None) -> float:
    """Integral of |f|^p over the finite-exponent nodes plus the max of |f|
    over the p = inf nodes (restricted to ``region`` when given)."""
    _check_grid(f, p)
    idx, w = region_weights(f.grid, region)
    return _modular_values(np.abs(f.values), p, idx, w)


@dataclass
class LuxemburgTrace:
    lambdas: list[float] = field(default_factory=list)
    modulars: list[float] = field(default_factory=list)


def _luxemburg(absf, p, idx, w, rtol, volume, trace=None) -> float:
    fmax = float(absf[idx].max()) if idx.size else 0.0
    if fmax == 0.0:
        return 0.0

    def rho(lam):
        val = _modular_values(absf / lam, p, idx, w)
        if trace is not None:
            trace.lambdas.append(lam)
            trace.modulars.append(val)
        return val

    lo = 1e-12
    hi = fmax * (volume + 1.0)
    # grow the bracket if the a-priori upper end is not feasible
    while rho(hi) > 1.0:
        lo, hi = hi, hi * 2.0
    if rho(lo) <= 1.0:
        return lo
    while hi / lo > 1.0 + rtol:
        mid = math.sqrt(lo * hi)
        if rho(mid) <= 1.0:
            hi = mid
        else:
            lo = mid
    return hi


def luxemburg_norm(
    f: GridFunction,
    p: ExponentFunction,
    region: Region = None,
    rtol: float = 1e-8,
    trace: LuxemburgTrace | None = None,
) -> float:
    """inf{lam > 0 : modular(f/lam) <= 1}, by bisection in log(lam).

    The returned value is the feasible end of the final bracket.
    """
    _check_grid(f, p)
    idx, w = region_weights(f.grid, region)
    return _luxemburg(np.abs(f.values), p, idx, w, rtol, float(w.sum()), trace)


def dual_exponent(p: ExponentFunction) -> ExponentFunction:
    """Pointwise conjugate exponent, 1/p + 1/p' = 1."""
    v = p.values
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(v == 1.0, np.inf, np.where(np.isinf(v), 1.0, v / (v - 1.0)))
    p_inf = None
    if p.p_inf is not None:
        p_inf = conjugate(p.p_inf)
    src = None if p.source is None else _DualSource(p.source)
    return ExponentFunction(p.grid, q, p_inf, src)


def conjugate(q: float) -> float:
    if q == 1.0:
        return math.inf
    if math.isinf(q):
        return 1.0
    return q / (q - 1.0)


class _DualSource:
    def __init__(self, fn):
        self.fn = fn

    def __call__(self, x):
        v = np.asarray(self.fn(x), dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(v == 1.0, np.inf, np.where(np.isinf(v), 1.0, v / (v - 1.0)))


@dataclass(frozen=True)
class LogHolderCertificate:
    """Smallest constants consistent with the sampled node pairs.

    These are grid-level lower bounds for the continuum constants.
    ``*_recip`` entries are the same constants for 1/p.
    """

    c_local: float
    c_infinity: float
    c_local_recip: float
    c_infinity_recip: float
    pairs: int
    h: float

    def to_dict(self) -> dict:
        return {
            "c_local": self.c_local,
            "c_infinity": self.c_infinity,
            "c_local_recip": self.c_local_recip,
            "c_infinity_recip": self.c_infinity_recip,
            "pairs": self.pairs,
            "h": self.h,
            "note": "grid-level lower bounds for the log-Hölder constants",
        }


def _pair_constant(vals: np.ndarray, pts: np.ndarray, max_pairs: int, rng) -> tuple[float, int]:
    m = vals.size
    if m * (m - 1) // 2 <= max_pairs:
        i, j = np.triu_indices(m, k=1)
    else:
        i = rng.integers(0, m, size=max_pairs)
        j = rng.integers(0, m, size=max_pairs)
        keep = i != j
        i, j = i[keep], j[keep]
        # always include nearest-neighbour pairs: they carry the local modulus
        nb = np.arange(m - 1)
        i = np.concatenate([i, nb])
        j = np.concatenate([j, nb + 1])
    best = 0.0
    chunk = 1 << 20
    for s in range(0, i.size, chunk):
        a, b = i[s : s + chunk], j[s : s + chunk]
        d = np.linalg.norm(pts[a] - pts[b], axis=-1)
        c = np.abs(vals[a] - vals[b]) * np.log(math.e + 1.0 / d)
        best = max(best, float(c.max()) if c.size else 0.0)
    return best, int(i.size)


def log_holder_constants(
    p: ExponentFunction, max_pairs: int = 2_000_000, seed: int = 0
) -> LogHolderCertificate:
    """Certify both log-Hölder inequalities on the sampled nodes, for p and for 1/p."""
    if math.isinf(p.p_plus):
        raise ValueError("requires bounded exponent")
    rng = np.random.default_rng(seed)
    pts = p.grid.coords()
    vals = p.values
    rec = 1.0 / vals
    c_loc, npairs = _pair_constant(vals, pts, max_pairs, rng)
    c_loc_r, _ = _pair_constant(rec, pts, max_pairs, np.random.default_rng(seed))
    p_inf = p.p_inf if p.p_inf is not None else float(vals[np.argmax(np.linalg.norm(pts, axis=-1))])
    weight = np.log(math.e + np.linalg.norm(pts, axis=-1))
    c_inf = float(np.max(np.abs(vals - p_inf) * weight))
    c_inf_r = float(np.max(np.abs(rec - 1.0 / p_inf) * weight))
    return LogHolderCertificate(c_loc, c_inf, c_loc_r, c_inf_r, npairs, p.grid.h)


def harmonic_mean_exponent(p: ExponentFunction, Q: Cube) -> float:
    """p_Q with 1/p_Q the average of 1/p over Q (p = inf contributes 0)."""
    idx, w = region_weights(p.grid, Q)
    m = w.sum()
    if not m > 0:
        raise ValueError("degenerate region")
    avg = float(np.dot(p.reciprocal()[idx], w) / m)
    return math.inf if avg == 0.0 else 1.0 / avg


def save_exponent(path, p: ExponentFunction) -> None:
    write_csv(path, p.grid, p.values)


def load_exponent(path, p_inf: float | None = None) -> ExponentFunction:
    grid, arr = read_csv(path)
    return ExponentFunction(grid, arr, p_inf)
