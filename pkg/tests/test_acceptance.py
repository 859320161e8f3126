"""Acceptance suite: criteria 1-12 at their stated tolerances.

Each test records one line in ACCEPTANCE; conftest prints them in the
terminal summary.
"""

import json
import math
import time

import numpy as np
import pytest

from morreylab.cli import main
from morreylab.exponents import ExponentFunction, harmonic_mean_exponent, luxemburg_norm
from morreylab.geometry import Ball, Cube, Grid, GridFunction, region_measure
from morreylab.operators import (
    bilinear_commutator,
    bilinear_fractional,
    constant_rough_kernel,
    cz_kernel,
    extended_bilinear_terms,
    fractional_kernel,
    odd_rough_kernel,
    truncated_bilinear,
)
from morreylab.spaces import Lebesgue, VariableLebesgue, WeightedLebesgue
from morreylab.verify import (
    AveragingOp,
    averaging_closed_form,
    ball_independence_check,
    bmo_necessity_experiment,
    chi_duality_check,
    operator_norm_estimate,
    truncation_convergence_check,
    w_class_experiment,
)
from morreylab.verify.experiments import averaging_family
from morreylab.verify.families import (
    GaussPoly,
    RegionIndicator,
    bmo_growth_family,
    bmo_plateau_family,
    gaussian_family,
)
from morreylab.weights import Weight, WeightProfile, classical_morrey_profile

ACCEPTANCE: dict[int, str] = {}
SUITE_START = time.perf_counter()
SUITE_LIMIT = 15 * 60


def record(n: int, ok: bool, detail: str):
    ACCEPTANCE[n] = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(ACCEPTANCE[n])
    assert ok, detail


def log_decay(grid, base=2.0):
    return ExponentFunction.from_callable(grid, lambda x: base + 1 / np.log(np.e + np.abs(x)))


def test_c01_luxemburg_golden_ratio():
    t0 = time.perf_counter()
    h = 1 / 512
    # staggered box so that x = 1 is a node shared by the two exponent pieces
    g = Grid.line(-h / 2, 2 + h / 2, h)
    p = ExponentFunction.from_callable(g, lambda x: np.where(x <= 1, 1.0, 2.0))
    f = GridFunction.from_callable(g, RegionIndicator(Cube((1.0,), 2.0)))
    v = luxemburg_norm(f, p)
    dt = time.perf_counter() - t0
    err = abs(v - (1 + math.sqrt(5)) / 2)
    record(1, err <= 1e-4 and dt < 1.0, f"norm={v:.8f} |err|={err:.2e} time={dt:.3f}s")


def test_c02_indicator_duality_sandwich():
    t0 = time.perf_counter()
    g = Grid.line(-10.0, 10.0, 1 / 64)
    balls = [Ball((c,), 2.0**k) for c in (0.0, 1.0) for k in range(-4, 4)]
    spaces = {
        "lebesgue": Lebesgue(2.0, g),
        "weighted": WeightedLebesgue(2.0, Weight.power(g, 0.5)),
        "variable": VariableLebesgue(log_decay(g)),
    }
    parts, ok = [], True
    for name, X in spaces.items():
        rep = chi_duality_check(X, balls, refine=True)
        mins = min(rep.check("min_s")["value"], rep.check("min_s_refined")["value"])
        drift = rep.check("max_s_drift")["value"]
        ok &= mins >= 1 - 1e-6 and drift < 0.1
        parts.append(f"{name}: min s={mins:.6f} drift={drift:.3f}")
    dt = time.perf_counter() - t0
    record(2, ok and dt < 10.0, "; ".join(parts) + f"; time={dt:.1f}s")


def test_c03_indicator_asymptotic_band():
    def ratios(h):
        g = Grid.line(-10.0, 10.0, h)
        p = log_decay(g)
        out = []
        for c in (0.0, 1.0, 3.0):
            for k in range(-4, 3):
                Q = Cube((c,), 2.0**k)
                chi = GridFunction.from_callable(g, RegionIndicator(Q))
                out.append(luxemburg_norm(chi, p, Q) / region_measure(g, Q) ** (1 / harmonic_mean_exponent(p, Q)))
        return np.array(out)

    r1, r2 = ratios(1 / 64), ratios(1 / 128)
    c1 = max(r1.max(), 1 / r1.min())
    c2 = max(r2.max(), 1 / r2.min())
    drift = abs(c2 - c1) / c1
    ok = drift < 0.1 and np.all((r2 >= 1 / c2) & (r2 <= c2))
    record(3, ok, f"band c={c1:.6f} (h/2: {c2:.6f}) drift={drift:.2e}")


def test_c04_ball_independence():
    t0 = time.perf_counter()
    g = Grid.line(-2.0, 2.0, 1 / 256)
    f = GridFunction.from_callable(g, GaussPoly(0.1, 0.3, 0.5))
    h2 = GridFunction.from_callable(g, GaussPoly(-0.2, 0.4, -0.3))
    cases = [
        (0.0, Ball((0.0,), 0.25), Ball((0.125,), 0.5)),
        (0.25, Ball((0.25,), 0.125), Ball((0.0,), 0.5)),
        (-0.5, Ball((-0.5,), 0.25), Ball((-0.25,), 0.5)),
        (0.5, Ball((0.375,), 0.25), Ball((0.75,), 0.5)),
        (0.0, Ball((-0.0625,), 0.125), Ball((0.0625,), 0.125)),
    ]
    rep = ball_independence_check(f, h2, fractional_kernel(1.0), cases, tol=1e-3, refine=True)
    gap, gap2 = rep.check("max_gap")["value"], rep.check("max_gap_refined")["value"]
    dt = time.perf_counter() - t0
    ok = gap <= 1e-3 and gap2 <= 5e-4 and dt < 60
    record(4, ok, f"max gap h=1/256: {gap:.2e}, h=1/512: {gap2:.2e}; time={dt:.1f}s")


def test_c05_agreement_clause():
    g = Grid.line(-2.0, 2.0, 1 / 256)
    K = fractional_kernel(1.0)
    worst, tails = 0.0, 0.0
    for c, s, B in ((0.0, 0.1, Ball((0.0,), 0.5)), (0.3, 0.05, Ball((0.25,), 0.25)), (-0.5, 0.2, Ball((-0.5,), 1.0))):
        f = GridFunction.from_callable(g, GaussPoly(c, s, 0.3, cutoff=3))
        h2 = GridFunction.from_callable(g, GaussPoly(c + s / 2, s, 0.0, cutoff=3))
        x = B.center[0]
        T = extended_bilinear_terms(f, h2, K, B, x)
        tails = max(tails, abs(T.outer), abs(T.cross_1), abs(T.cross_2))
        worst = max(worst, abs(T.total - truncated_bilinear(f, h2, K, g.h, x)))
    record(5, worst <= 1e-9 and tails == 0.0, f"max |T_ext - T_eps_min|={worst:.2e}, max |tail|={tails:.1e}")


def test_c06_bilinear_fractional_oracle():
    g = Grid.line(-2.0, 2.0, 1 / 256)
    chi = GridFunction.from_callable(g, RegionIndicator(Cube((0.0,), 2.0)))
    v = bilinear_fractional(chi, chi, 1.0, [g.node_index((0.0,))])[0]
    rel = abs(v / (8 * math.log(2)) - 1)
    record(6, rel <= 0.01, f"I_1(chi, chi)(0)={v:.6f} vs 8 ln 2={8 * math.log(2):.6f} rel={rel:.2e}")


def test_c07_averaging_operator_exactness():
    g = Grid.line(-4.0, 4.0, 1 / 128)
    extra = [(n, f, f) for n, f in gaussian_family(g, [0.0], [0.5, 1.0])]
    w1, w2, wy = Weight.power(g, 0.4), Weight.power(g, -0.2), Weight.power(g, 0.1)
    triples = {
        "lebesgue": (Lebesgue(2.0, g), Lebesgue(4.0, g), Lebesgue(4 / 3, g)),
        "weighted": (WeightedLebesgue(2.0, w1), WeightedLebesgue(4.0, w2), WeightedLebesgue(4 / 3, wy)),
    }
    parts, ok = [], True
    for name, (X1, X2, Y) in triples.items():
        for Q in (Cube((0.5,), 1.0), Cube((0.0,), 0.5)):
            ref = averaging_closed_form(X1, X2, Y, 0.5, Q)
            rep = operator_norm_estimate(AveragingOp(Q, 0.5), (X1, X2), Y, averaging_family(X1, X2, Q, extra), reference=ref)
            err = rep.check("reference_rel_error")["value"]
            ok &= err <= 0.05
            parts.append(f"{name} {Q.center[0]}/{Q.side}: {err:.1e}")
    record(7, ok, "relative error " + ", ".join(parts))


def _bumps(g, scales, window):
    fam = []
    for s in scales:
        for c in (0.0, s / 2):
            f = GridFunction.from_callable(g, GaussPoly(c, s, 0.0, cutoff=3))
            f2 = GridFunction.from_callable(g, GaussPoly(c, s, 0.5, cutoff=3))
            fam.append((f"s={s},c={c}", f, f2, Cube((c,), window * s)))
    return fam


def test_c08_bmo_necessity():
    sp = (Lebesgue(2.0), Lebesgue(2.0), Lebesgue(1.0))
    K = cz_kernel(1)
    ks = [1, 2, 3, 4, 5]
    # growth: sign(x) min(k, log 1/|x|) on a fine grid
    g = Grid.line(-1.0, 1.0, 2.0**-11)
    regions = [Cube((c,), 2.0**-j) for c in (0.0, 2.0**-10) for j in range(0, 9)]
    pairs = [(Cube((2.0**-j / 2,), 2.0**-j), Cube((-1.5 * 2.0**-j,), 2.0**-j)) for j in range(2, 8)]
    grow = bmo_necessity_experiment(
        K, list(zip(ks, bmo_growth_family(g, ks))), sp, _bumps(g, [2.0**-j for j in range(5, 9)], 12), regions, pairs, stride=4
    )
    heads = [r["measured"] for r in grow.rows if "k" in r]
    # plateau: truncated log|x| on a staggered grid (no node at the singularity)
    h = 1 / 8
    gp = Grid.line(-96 + h / 2, 96 - h / 2, h)
    regions_p = [Cube((c,), 2.0**-j) for c in (0.0, 0.5) for j in range(-7, 1)]
    pairs_p = [(Cube((2.0**-j / 2,), 2.0**-j), Cube((-1.5 * 2.0**-j,), 2.0**-j)) for j in range(-5, 0)]
    plat = bmo_necessity_experiment(
        K, list(zip(ks, bmo_plateau_family(gp, ks))), sp, _bumps(gp, [2.0, 4.0, 8.0, 16.0], 8), regions_p, pairs_p,
        mode="plateau", stride=2, require_increasing=False,
    )
    increasing = all(b > a for a, b in zip(heads, heads[1:]))
    spread = plat.check("plateau_spread")["value"]
    osc = max(grow.check("oscillation_pair_ratio")["value"], plat.check("oscillation_pair_ratio")["value"])
    ok = grow.passed and plat.passed and increasing and spread <= 0.15 and osc <= 2 + 1e-6
    record(8, ok, f"growth headlines {[round(v, 2) for v in heads]}; plateau spread={spread:.3f}; max Q/Q' ratio={osc:.4f}")


def test_c09_truncation_convergence():
    h = 2.0**-11
    g = Grid.line(-1.0, 1.0, h)
    f = GridFunction.from_callable(g, GaussPoly(0.0, 0.25))
    ladder = [h * 2**k for k in range(7, -1, -1)]
    parts, ok = [], True
    for K in (fractional_kernel(1.5), odd_rough_kernel()):
        rep = truncation_convergence_check(f, f, K, [0.0], ladder)
        seq = rep.config["osc_sequence"]
        mono = all(b <= a + 1e-12 for a, b in zip(seq, seq[1:]))
        ok &= rep.passed and mono and seq[-1] < 1e-3
        parts.append(f"{K.name}: final osc={seq[-1]:.2e}")
    neg = truncation_convergence_check(f, f, constant_rough_kernel(), [0.0], ladder)
    ok &= neg.verdict == "fail"
    parts.append(f"non-mean-zero control: {neg.verdict} (osc={neg.config['osc_sequence'][-1]:.2f})")
    record(9, ok, "; ".join(parts))


def test_c10_w_class_discrimination():
    X = Lebesgue(2.0)
    parts, ok = [], True
    for name, u in (("r^(1/p)", WeightProfile.power(1 / 4)), ("|B|^(1/q-1/p)", classical_morrey_profile(X, 4.0, 2.0))):
        good = w_class_experiment(u, X, 0.0)
        bad = w_class_experiment(u, X, 0.9)
        ratio = good.check("last_term_ratio")["value"]
        growth = bad.config["partial_sum_growth"]
        ok &= good.passed and ratio < 1 and bad.verdict == "fail" and growth >= 2
        parts.append(f"{name}: ratio={ratio:.3f}, alpha=0.9 growth={growth:.1f}x")
    record(10, ok, "; ".join(parts))


def test_c11_commutator_two_paths():
    rng = np.random.default_rng(2024)
    g = Grid.line(-1.0, 1.0, 1 / 64)
    kernels = [cz_kernel(), fractional_kernel(1.0), fractional_kernel(0.5), odd_rough_kernel()]
    worst = 0.0
    for i in range(100):
        f1 = GridFunction.from_callable(g, GaussPoly(rng.uniform(-0.5, 0.5), rng.uniform(0.1, 0.4), rng.uniform(-1, 1)))
        f2 = GridFunction.from_callable(g, GaussPoly(rng.uniform(-0.5, 0.5), rng.uniform(0.1, 0.4), rng.uniform(-1, 1)))
        b = GridFunction(g, rng.normal(size=g.size))
        K = kernels[i % len(kernels)]
        x = float(g.axes()[0][rng.integers(0, g.size)])
        eps = g.h * rng.integers(1, 5)
        slot = 1 + i % 2
        mode = "joint" if i % 3 else "product"
        a = bilinear_commutator(b, slot, f1, f2, K, eps, x, path="kernel", mode=mode)
        d = bilinear_commutator(b, slot, f1, f2, K, eps, x, path="difference", mode=mode)
        worst = max(worst, abs(a - d))
    record(11, worst <= 1e-10, f"max |kernel path - difference path| over 100 configs = {worst:.2e}")


def test_c12_negative_controls_and_runtime(tmp_path):
    out = tmp_path / "neg"
    code = main(["run", "--config", "negative-controls", "--out", str(out)])
    summary = json.loads((out / "summary.json").read_text())
    types = {e["type"] for e in summary["experiments"]}
    failing = all(e["verdict"] == "fail" for e in summary["experiments"])
    elapsed = time.perf_counter() - SUITE_START
    ok = failing and code == len(summary["experiments"]) and len(types) == 11 and elapsed < SUITE_LIMIT
    record(12, ok, f"{summary['failed']}/{len(summary['experiments'])} negative controls fail over {len(types)} types; acceptance run {elapsed:.0f}s")
