"""Experiment configuration: parsing, validation and object construction.

A config is a TOML document with named sections::

    seed = 0
    [grid]                    # the default grid; more under [grids.NAME]
    lower = -4.0
    upper = 4.0
    h = 0.015625
    [exponents.p1]            # kind: constant | log_decay | step | harmonic | sobolev
    [weights.w1]              # kind: power | product
    [spaces.X1]               # kind: lebesgue | weighted | variable | morrey
    [kernels.K]               # kind: fractional | odd_rough | constant_rough | cz
    [families.F]              # kind: gaussian_pairs | indicator_pairs | random_pairs |
                              #       gaussians | dipoles | boxes | spikes | bmo_inputs
    [[experiments]]           # type + named references + tolerances
    id = "..."
    type = "holder"
    paper_anchor = "..."

References between sections are by name and resolved eagerly, so a
missing name fails before any experiment runs.
"""

from __future__ import annotations

import copy
import math
import sys
from dataclasses import dataclass, field
from typing import Any

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..exponents import ExponentFunction
from ..geometry import Ball, Cube, Grid, GridFunction
from ..operators.kernels import constant_rough_kernel, cz_kernel, fractional_kernel, odd_rough_kernel
from ..spaces import Lebesgue, MorreySpace, VariableLebesgue, WeightedLebesgue
from ..verify import experiments as ex
from ..verify.families import (
    Dipole,
    GaussPoly,
    RegionIndicator,
    Spike,
    bmo_growth_family,
    bmo_plateau_family,
    random_pairs,
)
from ..weights import Weight, WeightProfile, classical_morrey_profile, w_class_check, weighted_morrey_profile

EXPERIMENT_TYPES = tuple(ex.EXPERIMENTS)
BUDGET = 10**9


class ConfigError(ValueError):
    pass


SINGULAR = {"exponents": "exponent", "weights": "weight", "spaces": "space", "kernels": "kernel", "families": "family"}


def load_toml(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as err:
        raise ConfigError(f"{path}: parse error: {err}") from None
    except OSError as err:
        raise ConfigError(f"{path}: {err.strerror}") from None


def _need(d: dict, key: str, where: str):
    if key not in d:
        raise ConfigError(f"{where}: missing required key {key!r}")
    return d[key]


def _vec(v) -> tuple:
    return tuple(float(x) for x in np.atleast_1d(v))


# grids


def make_grid(spec: dict, where: str) -> Grid:
    lower, upper, h = _vec(_need(spec, "lower", where)), _vec(_need(spec, "upper", where)), float(_need(spec, "h", where))
    if len(lower) != len(upper) or len(lower) not in (1, 2):
        raise ConfigError(f"{where}: lower/upper must both have 1 or 2 entries")
    if not h > 0:
        raise ConfigError(f"{where}: grid spacing must be positive")
    try:
        return Grid(len(lower), lower, upper, h)
    except ValueError as err:
        raise ConfigError(f"{where}: {err}") from None


def apply_resolution(raw: dict, override: str | None) -> dict:
    """Copy of the raw config with every grid spacing overridden.

    ``override`` is a number (new spacing) or ``h/N`` (divide by N)."""
    cfg = copy.deepcopy(raw)
    if override is None:
        return cfg
    text = str(override).strip()
    if text.startswith("h/"):
        div = float(text[2:])
        if not div > 0:
            raise ConfigError("resolution override divisor must be positive")
        fn = lambda h: h / div
    else:
        val = float(text)
        if not val > 0:
            raise ConfigError("resolution override must be positive")
        fn = lambda h: val
    grids = [cfg["grid"]] if "grid" in cfg else []
    grids += list(cfg.get("grids", {}).values())
    for g in grids:
        g["h"] = fn(float(g["h"]))
    return cfg


# exponents, weights, spaces, kernels


class _LogDecay:
    def __init__(self, base, amp):
        self.base, self.amp = base, amp

    def __call__(self, x):
        r = np.abs(x) if x.ndim == 1 else np.linalg.norm(x, axis=-1)
        return self.base + self.amp / np.log(math.e + r)


class _Step:
    def __init__(self, left, right, at):
        self.left, self.right, self.at = left, right, at

    def __call__(self, x):
        x1 = x if x.ndim == 1 else x[:, 0]
        return np.where(x1 < self.at, self.left, self.right)


class _Harmonic:
    def __init__(self, parts):
        self.parts = parts

    def __call__(self, x):
        return 1.0 / sum(1.0 / np.asarray(p(x), dtype=float) for p in self.parts)


class _Sobolev:
    def __init__(self, inner, shift):
        self.inner, self.shift = inner, shift

    def __call__(self, x):
        return 1.0 / (1.0 / np.asarray(self.inner(x), dtype=float) - self.shift)


@dataclass
class Context:
    """Resolved objects of one config, built lazily per grid."""

    raw: dict
    seed: int = 0
    grids: dict = field(default_factory=dict)
    _cache: dict = field(default_factory=dict)

    def grid(self, name: str = "default") -> Grid:
        if name not in self.grids:
            raise ConfigError(f"unresolved reference: grid {name!r}")
        return self.grids[name]

    def section(self, kind: str, name: str) -> dict:
        sec = self.raw.get(kind, {})
        if name not in sec:
            raise ConfigError(f"unresolved reference: {SINGULAR[kind]} {name!r}")
        return sec[name]

    def _cached(self, key, build):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    # exponent functions are built as callables, then sampled
    def exponent_fn(self, name: str):
        spec = self.section("exponents", name)
        where = f"exponents.{name}"
        kind = _need(spec, "kind", where)
        if kind == "constant":
            v = float(_need(spec, "value", where))
            if not v >= 1:
                raise ConfigError(f"{where}: exponent must be >= 1 (variable exponents take values in [1, inf])")
            return lambda x: np.full(x.shape[0], v)
        if kind == "log_decay":
            base, amp = float(spec.get("base", 2.0)), float(spec.get("amp", 1.0))
            if base + min(amp, 0.0) < 1:
                raise ConfigError(f"{where}: exponent must stay >= 1")
            return _LogDecay(base, amp)
        if kind == "step":
            left, right = float(_need(spec, "left", where)), float(_need(spec, "right", where))
            if min(left, right) < 1:
                raise ConfigError(f"{where}: exponent must stay >= 1")
            return _Step(left, right, float(spec.get("at", 0.0)))
        if kind == "harmonic":
            parts = [self.exponent_fn(p) for p in _need(spec, "of", where)]
            return _Harmonic(parts)
        if kind == "sobolev":
            n = int(spec.get("dim", 1))
            alpha = float(_need(spec, "alpha", where))
            if not 0 < alpha < n:
                raise ConfigError(f"{where}: need 0 < alpha < n for the off-diagonal exponent")
            return _Sobolev(self.exponent_fn(_need(spec, "of", where)), alpha / n)
        raise ConfigError(f"{where}: unknown exponent kind {kind!r}")

    def exponent(self, name: str, grid: Grid) -> ExponentFunction:
        def build():
            p = ExponentFunction.from_callable(grid, self.exponent_fn(name))
            return p
        try:
            return self._cached(("exp", name, grid), build)
        except ValueError as err:
            if isinstance(err, ConfigError):
                raise
            raise ConfigError(f"exponents.{name}: {err}") from None

    def weight(self, name: str, grid: Grid) -> Weight:
        spec = self.section("weights", name)
        where = f"weights.{name}"
        kind = _need(spec, "kind", where)
        if kind == "power":
            a = float(_need(spec, "a", where))
            if not a > -grid.n:
                raise ConfigError(f"{where}: power weight |x|^a needs a > -n to be locally integrable")
            return self._cached(("w", name, grid), lambda: Weight.power(grid, a, float(spec.get("c", 1.0))))
        if kind == "product":
            names = _need(spec, "of", where)
            powers = spec.get("powers", [1.0] * len(names))
            if len(powers) != len(names):
                raise ConfigError(f"{where}: 'powers' must match 'of'")

            def build():
                w = self.weight(names[0], grid) ** float(powers[0])
                for nm, s in zip(names[1:], powers[1:]):
                    w = w * (self.weight(nm, grid) ** float(s))
                return w

            return self._cached(("w", name, grid), build)
        raise ConfigError(f"{where}: unknown weight kind {kind!r}")

    def space(self, name: str, grid: Grid):
        spec = self.section("spaces", name)
        where = f"spaces.{name}"
        kind = _need(spec, "kind", where)
        if kind == "lebesgue":
            p = float(_need(spec, "p", where))
            if not p > 0:
                raise ConfigError(f"{where}: Lebesgue exponent must be positive")
            return Lebesgue(p, grid)
        if kind == "weighted":
            p = float(_need(spec, "p", where))
            if not p >= 1:
                raise ConfigError(f"{where}: weighted Lebesgue exponent must be >= 1")
            return WeightedLebesgue(p, self.weight(_need(spec, "weight", where), grid))
        if kind == "variable":
            rule = spec.get("associate_rule", "exact")
            if rule not in ("exact", "conjugate"):
                raise ConfigError(f"{where}: associate_rule must be 'exact' or 'conjugate'")
            return VariableLebesgue(self.exponent(_need(spec, "exponent", where), grid), rule)
        if kind == "morrey":
            base = self.space(_need(spec, "base", where), grid)
            prof = self.profile(_need(spec, "profile", where), grid, where)
            balls = regions(spec.get("balls", {"shape": "ball", "centers": [0.0], "log2": [-3, 1]}), where, "ball")
            return MorreySpace(base, prof, balls)
        raise ConfigError(f"{where}: unknown space kind {kind!r}")

    def profile(self, spec: dict, grid: Grid, where: str) -> WeightProfile:
        kind = _need(spec, "kind", where + ".profile")
        if kind == "classical":
            p, q = float(_need(spec, "p", where)), float(_need(spec, "q", where))
            if not 0 < q <= p:
                raise ConfigError(f"{where}: classical Morrey profile needs 0 < q <= p")
            return classical_morrey_profile(Lebesgue(q, grid), p, q)
        if kind == "weighted":
            k, p = float(_need(spec, "k", where)), float(_need(spec, "p", where))
            if not 0 < k < 1:
                raise ConfigError(f"{where}: weighted Morrey index needs 0 < k < 1")
            return weighted_morrey_profile(self.weight(_need(spec, "weight", where), grid), k, p)
        if kind == "power":
            return WeightProfile.power(float(_need(spec, "lam", where)), float(spec.get("c", 1.0)))
        if kind == "base_norm":
            return WeightProfile.base_norm(
                self.space(_need(spec, "space", where), grid), float(spec.get("theta", 1.0)), bool(spec.get("clip", True))
            )
        raise ConfigError(f"{where}: unknown profile kind {kind!r}")

    def kernel(self, name: str):
        spec = self.section("kernels", name)
        where = f"kernels.{name}"
        kind = _need(spec, "kind", where)
        n = int(spec.get("dim", 1))
        if n not in (1, 2):
            raise ConfigError(f"{where}: kernel dimension must be 1 or 2")
        if kind == "fractional":
            alpha = float(_need(spec, "alpha", where))
            if not 0 < alpha < 2 * n:
                raise ConfigError(
                    f"{where}: alpha = {alpha} violates 0 < alpha < 2n (order range of the bilinear fractional integral)"
                )
            return fractional_kernel(alpha, n)
        if kind == "odd_rough":
            return odd_rough_kernel(n)
        if kind == "constant_rough":
            return constant_rough_kernel(n)
        if kind == "cz":
            return cz_kernel(n)
        raise ConfigError(f"{where}: unknown kernel kind {kind!r}")

    def family(self, name: str, grid: Grid) -> list[tuple]:
        spec = self.section("families", name)
        return self._cached(("fam", name, grid), lambda: build_family(spec, grid, f"families.{name}", self.seed))


def regions(spec: dict, where: str, default_shape: str = "ball") -> list:
    """Region family from {shape, centers, log2 = [lo, hi]}: radius (ball)
    or side (cube) 2^k for k = lo..hi at every centre."""
    shape = spec.get("shape", default_shape)
    if shape not in ("ball", "cube"):
        raise ConfigError(f"{where}: region shape must be 'ball' or 'cube'")
    lo, hi = _need(spec, "log2", where)
    if hi < lo:
        raise ConfigError(f"{where}: empty log2 range")
    out = []
    for c in spec.get("centers", [0.0]):
        c = _vec(c)
        for k in range(int(lo), int(hi) + 1):
            out.append(Ball(c, 2.0**k) if shape == "ball" else Cube(c, 2.0**k))
    return out


def _center(c, n):
    v = _vec(c)
    return v[0] if n == 1 else v


def build_family(spec: dict, grid: Grid, where: str, seed: int) -> list[tuple]:
    kind = _need(spec, "kind", where)
    n = grid.n
    cut = spec.get("cutoff")
    if kind in ("gaussian_pairs", "bmo_inputs"):
        tilts = spec.get("tilts", [0.0, 0.5])
        wf = spec.get("window_factor")
        out = []
        for c in spec.get("centers", [0.0]):
            for w in _need(spec, "widths", where):
                w = float(w)
                cc = _center(c, n)
                shift = spec.get("shift_fraction", [0.0])
                for sft in shift:
                    c2 = cc + float(sft) * w if n == 1 else cc
                    f = GridFunction.from_callable(grid, GaussPoly(c2, w, float(tilts[0]), cut))
                    g = GridFunction.from_callable(grid, GaussPoly(c2, w, float(tilts[-1]), cut))
                    item = (f"gauss(c={c2},w={w})", f, g)
                    if wf is not None:
                        item = item + (Cube(_vec(c2), float(wf) * w),)
                    out.append(item)
        return out
    if kind == "indicator_pairs":
        cubes = regions(spec, where, "cube")
        return [
            (f"chi({Q!r})", GridFunction.from_callable(grid, RegionIndicator(Q)), GridFunction.from_callable(grid, RegionIndicator(Q)))
            for Q in cubes
        ]
    if kind == "random_pairs":
        return random_pairs(grid, int(_need(spec, "count", where)), int(spec.get("seed", seed)))
    if kind == "gaussians":
        return [
            (f"gauss(c={c},w={w})", GridFunction.from_callable(grid, GaussPoly(_center(c, n), float(w), float(spec.get("tilt", 0.0)), cut)))
            for c in spec.get("centers", [0.0])
            for w in _need(spec, "widths", where)
        ]
    if kind == "dipoles":
        out = []
        for s in _need(spec, "sides", where):
            s = float(s)
            q1 = Cube(_vec([-s / 2] + [0.0] * (n - 1)), s)
            q2 = Cube(_vec([s / 2] + [0.0] * (n - 1)), s)
            out.append((f"dipole(side={s})", GridFunction.from_callable(grid, Dipole(q1, q2))))
        return out
    if kind == "boxes":
        return [
            (f"box(half={L})", GridFunction.from_callable(grid, RegionIndicator(Cube(_vec([0.0] * n), 2 * float(L)))))
            for L in _need(spec, "half_widths", where)
        ]
    if kind == "spikes":
        c = float(spec.get("center", 0.0))
        return [(f"spike(height={H})", GridFunction.from_callable(grid, Spike(c, float(H)))) for H in _need(spec, "heights", where)]
    if kind == "mixed":
        out = []
        for part in _need(spec, "parts", where):
            out.extend(build_family(part, grid, where, seed))
        return out
    raise ConfigError(f"{where}: unknown family kind {kind!r}")


# experiments


def _pairs_only(items: list, where: str) -> list:
    if any(len(it) < 3 for it in items):
        raise ConfigError(f"{where}: this experiment needs a pair family")
    return items


def _singles(items: list) -> list:
    return [(it[0], it[1]) for it in items]


def _alpha(e: dict, where: str, n: int) -> float:
    a = float(e.get("alpha", 0.0))
    if not (0 <= a < 2 * n):
        raise ConfigError(f"{where}: alpha = {a} violates 0 <= alpha < 2n (order range of the bilinear operators)")
    return a


@dataclass
class Job:
    id: str
    type: str
    anchor: str
    entry: dict
    grid_name: str
    negative_control: bool = False
    call: tuple | None = None


def validate(raw: dict) -> tuple[Context, list[Job]]:
    """Parse the raw mapping into grids and jobs and resolve every named
    reference (without running anything)."""
    if "seed" not in raw:
        raise ConfigError("config: missing required key 'seed'")
    ctx = Context(raw, int(raw["seed"]))
    if "grid" in raw:
        ctx.grids["default"] = make_grid(raw["grid"], "grid")
    for name, spec in raw.get("grids", {}).items():
        ctx.grids[name] = make_grid(spec, f"grids.{name}")
    entries = raw.get("experiments", [])
    if not entries:
        raise ConfigError("config: no experiments declared")
    jobs, seen = [], set()
    for i, e in enumerate(entries):
        where = f"experiments[{i}]"
        eid = str(_need(e, "id", where))
        where = f"experiment {eid!r}"
        if eid in seen:
            raise ConfigError(f"{where}: duplicate id")
        seen.add(eid)
        typ = _need(e, "type", where)
        if typ not in EXPERIMENT_TYPES:
            raise ConfigError(f"{where}: unknown experiment type {typ!r} (known: {', '.join(EXPERIMENT_TYPES)})")
        anchor = _need(e, "paper_anchor", where)
        job = Job(eid, typ, str(anchor), e, e.get("grid", "default"), bool(e.get("negative_control", False)))
        ctx.grid(job.grid_name)
        jobs.append(job)
    for job in jobs:
        try:
            job.call = build_call(ctx, job)
        except ConfigError:
            raise
        except ValueError as err:
            raise ConfigError(f"experiment {job.id!r}: {err}") from None
    return ctx, jobs


def build_call(ctx: Context, job: Job):
    """(function, kwargs, cost estimate) for one job."""
    e, where = job.entry, f"experiment {job.id!r}"
    grid = ctx.grid(job.grid_name)
    n = grid.n
    fn = ex.EXPERIMENTS[job.type]
    kw: dict[str, Any] = {}
    cost = 0
    t = job.type

    def fam(key="family"):
        return ctx.family(_need(e, key, where), grid)

    def spaces(key="spaces", count=3):
        names = _need(e, key, where)
        if len(names) != count:
            raise ConfigError(f"{where}: {key!r} needs {count} entries")
        return [ctx.space(nm, grid) if nm else None for nm in names]

    if t == "holder":
        kw = dict(pairs=_pairs_only(fam(), where), X=ctx.space(_need(e, "space", where), grid), tol=float(e.get("tol", 1e-6)))
        if "associate" in e:
            kw["associate"] = ctx.space(e["associate"], grid)
    elif t == "chi_duality":
        kw = dict(X=ctx.space(_need(e, "space", where), grid), balls=regions(_need(e, "balls", where), where), refine=bool(e.get("refine", True)))
    elif t == "characteristic":
        X1, X2, Y = spaces()
        kw = dict(X1=X1, X2=X2, Y=Y, alpha=_alpha(e, where, n), regions=regions(_need(e, "regions", where), where), form=e.get("form", "ball"))
        if kw["form"] not in ("ball", "cube", "linear"):
            raise ConfigError(f"{where}: form must be ball, cube or linear")
        if kw["form"] != "linear" and X2 is None:
            raise ConfigError(f"{where}: bilinear forms need three spaces")
    elif t == "ball_independence":
        K = ctx.kernel(_need(e, "kernel", where))
        items = _pairs_only(fam(), where)
        f, g = items[0][1], items[0][2]
        cases = []
        for c in _need(e, "cases", where):
            x, c1, r1, c2, r2 = c
            cases.append((float(x) if n == 1 else _vec(x), Ball(_vec(c1), float(r1)), Ball(_vec(c2), float(r2))))
        kw = dict(f=f, g=g, K=K, cases=cases, tol=float(e.get("tol", 1e-3)), tails=tuple(e.get("tails", ["outer", "cross_1", "cross_2"])), refine=bool(e.get("refine", True)))
        per = np.count_nonzero(f.values) * np.count_nonzero(g.values)
        cost = per * len(cases) * 3 * (5 if kw["refine"] else 1)
    elif t == "operator_norm":
        op_spec = _need(e, "operator", where)
        X1, X2 = spaces("spaces", 2)
        Y = ctx.space(_need(e, "out", where), grid)
        items = _pairs_only(fam(), where)
        okind = _need(op_spec, "kind", where + ".operator")
        if okind == "averaging":
            Q = Cube(_vec(_need(op_spec, "center", where)), float(_need(op_spec, "side", where)))
            alpha = _alpha(op_spec, where, n)
            op = ex.AveragingOp(Q, alpha)
            if op_spec.get("extremal_inputs", True):
                items = ex.averaging_family(X1, X2, Q, items)
            ref = op_spec.get("reference")
            if ref == "closed_form":
                ref = ex.averaging_closed_form(X1, X2, Y, alpha, Q)
            kw["reference"] = None if ref is None else float(ref)
        elif okind == "kernel":
            K = ctx.kernel(_need(op_spec, "kernel", where))
            eps = float(op_spec.get("eps", 0.0))
            b = None
            if "b" in op_spec:
                b = _b_function(op_spec["b"], grid, where)
            op = ex.KernelOp(K, eps, None, int(op_spec.get("stride", 1)), b, int(op_spec.get("slot", 1)) if b is not None else 0)
            if b is not None:
                kw["bmo_regions"] = regions(_need(e, "bmo_regions", where), where, "cube")
            cost = _kernel_cost(items, grid, int(op_spec.get("stride", 1)))
        else:
            raise ConfigError(f"{where}: unknown operator kind {okind!r}")
        kw.update(op=op, in_spaces=(X1, X2), out_space=Y, family=items, refine=bool(e.get("refine", False)))
        if kw["refine"]:
            cost *= 9
    elif t == "averaging_equivalence":
        X1, X2, Y = spaces()
        kw = dict(X1=X1, X2=X2, Y=Y, alpha=_alpha(e, where, n), cubes=regions(_need(e, "cubes", where), where, "cube"))
        if "family" in e:
            kw["extra_family"] = _pairs_only(fam(), where)
    elif t == "bmo_necessity":
        K = ctx.kernel(_need(e, "kernel", where))
        X1, X2, Y = spaces()
        bspec = _need(e, "b_family", where)
        ks = [float(k) for k in _need(bspec, "ks", where)]
        bkind = bspec.get("kind", "growth")
        if bkind == "growth":
            bs = bmo_growth_family(grid, ks)
        elif bkind == "plateau":
            bs = bmo_plateau_family(grid, ks)
        else:
            raise ConfigError(f"{where}: b_family kind must be growth or plateau")
        items = _pairs_only(fam(), where)
        sides = _need(e, "cube_pairs", where).get("log2")
        lo, hi = sides
        pairs = [(Cube(_vec([2.0**k / 2] + [0.0] * (n - 1)), 2.0**k), Cube(_vec([-1.5 * 2.0**k] + [0.0] * (n - 1)), 2.0**k)) for k in range(int(lo), int(hi) + 1)]
        profiles = []
        for nm in e.get("profiles", []):
            M = ctx.space(nm, grid)
            if not isinstance(M, MorreySpace):
                raise ConfigError(f"{where}: profile reference {nm!r} is not a Morrey space")
            profiles.append((nm, w_class_check(M.profile, M.base, _alpha(e, where, n))))
        stride = int(e.get("stride", 1))
        kw = dict(
            K=K, b_family=list(zip(ks, bs)), spaces=(X1, X2, Y), family=items,
            bmo_regions=regions(_need(e, "bmo_regions", where), where, "cube"), cube_pairs=pairs,
            mode=e.get("mode", "growth"), stride=stride, require_increasing=bool(e.get("require_increasing", True)),
            profiles=profiles,
        )
        if kw["mode"] not in ("growth", "plateau"):
            raise ConfigError(f"{where}: mode must be growth or plateau")
        cost = _kernel_cost(items, grid, stride) * len(ks)
    elif t == "truncation_convergence":
        K = ctx.kernel(_need(e, "kernel", where))
        items = _pairs_only(fam(), where)
        lo, hi = _need(e, "ladder_log2_h", where)
        ladder = [grid.h * 2.0**k for k in range(int(hi), int(lo) - 1, -1)]
        nodes = [float(x) if n == 1 else _vec(x) for x in e.get("nodes", [0.0])]
        kw = dict(f=items[0][1], g=items[0][2], K=K, nodes=nodes, ladder=ladder, window=int(e.get("window", 4)), tol=float(e.get("tol", 1e-3)), mode=e.get("mode", "joint"))
        cost = np.count_nonzero(kw["f"].values) * np.count_nonzero(kw["g"].values) * len(ladder) * len(nodes)
    elif t == "fefferman_stein":
        p = ctx.exponent(_need(e, "exponent", where), grid)
        kw = dict(family=_singles(fam()), p=p, delta=float(e.get("delta", 1.0)), stride=int(e.get("stride", 1)))
        if not 0 < kw["delta"] <= 1:
            raise ConfigError(f"{where}: delta must lie in (0, 1]")
        if "radii_log2" in e:
            lo, hi = e["radii_log2"]
            kw["radii"] = [2.0**k for k in range(int(lo), int(hi) + 1)]
    elif t == "bfs_axioms":
        kw = dict(X=ctx.space(_need(e, "space", where), grid), family=_singles(fam()), sets=regions(_need(e, "sets", where), where, "cube"), seed=ctx.seed)
    elif t == "w_class":
        M = ctx.space(_need(e, "space", where), grid)
        if not isinstance(M, MorreySpace):
            raise ConfigError(f"{where}: w_class needs a Morrey space reference")
        kw = dict(u=M.profile, X=M.base, alpha=_alpha(e, where, n), J=int(e.get("J", 8)), strengthened=bool(e.get("strengthened", False)))
        if kw["J"] < 4:
            raise ConfigError(f"{where}: J must be at least 4 (series truncation)")
    return fn, kw, int(cost)


def _b_function(spec: dict, grid: Grid, where: str) -> GridFunction:
    kind = _need(spec, "kind", where + ".b")
    k = float(_need(spec, "k", where + ".b"))
    if kind == "growth":
        return bmo_growth_family(grid, [k])[0]
    if kind == "plateau":
        return bmo_plateau_family(grid, [k])[0]
    raise ConfigError(f"{where}: b kind must be growth or plateau")


def _kernel_cost(items: list, grid: Grid, stride: int) -> int:
    total = 0
    for it in items:
        f, g = it[1], it[2]
        if len(it) > 3:
            w = it[3]
            targets = max(1, int((w.side / grid.h) ** grid.n) // stride**grid.n)
        else:
            targets = max(1, grid.size // stride**grid.n)
        total += targets * int(np.count_nonzero(f.values)) * int(np.count_nonzero(g.values))
    return total
