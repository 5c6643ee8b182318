"""Acceptance criteria, one test per criterion.

Each test records a ``PASS``/``FAIL`` line that the session prints at the
end (see conftest.py); running this file directly prints the same lines.
Tolerances are the fixed acceptance tolerances, not tuned to results.
"""
import math
import random
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from pslab.certreal import (
    AlphaContext,
    asymptotic_constant,
    inverse_second_derivative,
    inverse_third_derivative_ratio,
)
from pslab.counting import (
    default_constants,
    error_term_E1,
    error_term_E2,
    kap_count,
    oracle_pair_table,
    pair_count,
    sweep,
    triplet_count,
)
from pslab.equidist import (
    ConvexRegion,
    WindowSpec,
    discrepancy_brute,
    discrepancy_exact,
    etk_bound,
    predicted_density,
    region_measure_grid,
    short_interval_count,
    unit_box,
    weyl_sum,
)
from pslab.errors import ResourceLimit
from pslab.suites import fd_derivatives

REPORT = []


def record(criterion, passed, detail):
    line = f"{'PASS' if passed else 'FAIL'} criterion {criterion}: {detail}"
    REPORT.append(line)
    print(line)
    return passed


@pytest.fixture(scope="module")
def ctx():
    return AlphaContext.from_value("1.5")


@pytest.fixture(scope="module")
def window_sweep(ctx):
    """k=3 sweep over [200000, 210000]; its records carry the k=2 counts too."""
    t0 = time.time()
    rep = sweep(ctx, 3, 200_000, 210_000)
    return rep, time.time() - t0


# --- 1 ----------------------------------------------------------------------------

ORACLE_DMAX = 3000


@pytest.mark.parametrize("alpha", [
    "1.5",
    "1.7",
    pytest.param("1.2", marks=pytest.mark.xfail(
        raises=ResourceLimit, strict=True,
        reason="the brute oracle for alpha=1.2 needs about (3000/1.2)**5 ~ 1e17 sequence "
               "terms; it refuses with ResourceLimit instead of running")),
])
def test_c1_oracle_equivalence(alpha):
    ctx = AlphaContext.from_value(alpha)
    t0 = time.time()
    try:
        table = oracle_pair_table(ctx, ORACLE_DMAX)
    except ResourceLimit as exc:
        record("1", False, f"alpha={alpha} d<={ORACLE_DMAX}: oracle unavailable ({exc})")
        raise
    bad = [d for d in range(1, ORACLE_DMAX + 1) if pair_count(ctx, d).pair_count != table[d]]
    ok = record("1", not bad, f"alpha={alpha} d<={ORACLE_DMAX}: {len(bad)} mismatches "
                              f"({time.time() - t0:.0f}s)")
    assert ok, bad[:10]


def test_c1_reduced_range_alpha_12():
    # the part of criterion 1 for alpha=1.2 that the oracle can reach
    ctx = AlphaContext.from_value("1.2")
    table = oracle_pair_table(ctx, 25)
    bad = [d for d in range(1, 26) if pair_count(ctx, d).pair_count != table[d]]
    ok = record("1 (reduced)", not bad, f"alpha=1.2 d<=25: {len(bad)} mismatches")
    assert ok


# --- 2 ----------------------------------------------------------------------------

def test_c2_hand_values(ctx):
    got = (pair_count(ctx, 1).pair_count, pair_count(ctx, 2).pair_count,
           pair_count(ctx, 3).pair_count, kap_count(ctx, 3, 3), triplet_count(ctx, 3))
    want = (1, 0, 4, 3, 1)
    ok = record("2", got == want, f"N(1),N(2),N(3),N_3(3),T(3) = {got}, expected {want}")
    assert ok


# --- 3 and 4 ------------------------------------------------------------------------

def test_c3_limit_constant(ctx, window_sweep):
    rep, secs = window_sweep
    target = asymptotic_constant(ctx, 2)
    mean2 = float(np.mean([r.pair_count / r.d for r in rep.records]))
    gap = abs(mean2 - target) / target
    ok = record("3", gap <= 0.05, f"mean N/d on [200000,210000] = {mean2:.7f}, target "
                                  f"{target:.7f}, relative gap {gap:.2e} <= 0.05 ({secs:.0f}s)")
    assert ok


def test_c4_k3_factor(ctx, window_sweep):
    rep, _ = window_sweep
    mean2 = float(np.mean([r.pair_count / r.d for r in rep.records]))
    mean3 = float(np.mean([r.kap_counts[3] / r.d for r in rep.records]))
    gap = abs(mean3 / (mean2 / 2) - 1)
    ok = record("4", gap <= 0.10, f"k=3 mean {mean3:.7f} vs half the k=2 mean "
                                  f"{mean2 / 2:.7f}, relative gap {gap:.2e} <= 0.10")
    assert ok


# --- 5 ------------------------------------------------------------------------------

def test_c5_triplets(ctx):
    expo = ctx.alpha * (ctx.beta - 1) + 1
    target = asymptotic_constant(ctx, 2) / expo
    gaps = {x: abs(triplet_count(ctx, x) / x ** expo - target) / target for x in (50, 400)}
    ok = record("5", gaps[400] <= 0.10 and gaps[400] < gaps[50],
                f"T(x)/x^{expo} gap at x=400 {gaps[400]:.2e} <= 0.10 and < gap at x=50 "
                f"{gaps[50]:.2e}")
    assert ok


# --- 6 ------------------------------------------------------------------------------

def test_c6_derivative_identities():
    worst2 = worst3 = 0.0
    for a in ("1.3", "1.5", "1.7"):
        ctx = AlphaContext.from_value(a)
        for r in (1, 5, 20):
            for d in (10**3, 10**5):
                fd2, fd3 = fd_derivatives(ctx, r, d)
                worst2 = max(worst2, abs(inverse_second_derivative(r, d, ctx) / fd2 - 1))
                worst3 = max(worst3, abs(inverse_third_derivative_ratio(r, d, ctx)
                                         / (-fd3 / fd2) - 1))
    ok = record("6", worst2 <= 1e-5 and worst3 <= 1e-4,
                f"max rel err y'' {worst2:.1e} <= 1e-5, -y'''/y'' {worst3:.1e} <= 1e-4")
    assert ok


# --- 7 ------------------------------------------------------------------------------

def test_c7_weyl_decay(ctx):
    small = WindowSpec.build(ctx, 1, 10**3, 0, 1)
    large = WindowSpec.build(ctx, 1, 10**6, 0, 1)
    vals = {h: (weyl_sum(ctx, small, *h), weyl_sum(ctx, large, *h))
            for h in ((1, 0), (0, 1), (1, 1))}
    ok = all(b < a for a, b in vals.values()) and vals[(1, 0)][1] <= 0.1
    record("7", ok, "; ".join(f"h={h}: d=1e3 {a:.3g} -> d=1e6 {b:.3g}"
                              for h, (a, b) in vals.items()))
    assert ok


# --- 8 ------------------------------------------------------------------------------

def test_c8_error_term_decay(ctx):
    cfg = default_constants(ctx)
    e = {d: (error_term_E1(ctx, d, cfg) / d, error_term_E2(ctx, d, cfg) / d)
         for d in (10**3, 10**5)}
    ok = e[10**5][0] < e[10**3][0] and e[10**5][1] < e[10**3][1]
    record("8", ok, f"E1/d {e[10**3][0]:.4g} -> {e[10**5][0]:.4g}, "
                    f"E2/d {e[10**3][1]:.4g} -> {e[10**5][1]:.4g} (c1={cfg.c1:.4g}, c2={cfg.c2:.4g})")
    assert ok


# --- 9 ------------------------------------------------------------------------------

def test_c9_discrepancy_suite():
    rng = random.Random(2024)
    mismatch = above = 0
    for _ in range(200):
        pts = [Fraction(rng.randrange(10**6), 10**6) for _ in range(rng.randint(1, 50))]
        ex = discrepancy_exact(pts)
        mismatch += ex != discrepancy_brute(pts)
        above += float(ex) > etk_bound(pts, 10)
    spaced_bad = 0
    for n in range(2, 65):
        pts = [Fraction(i, n) for i in range(n)]
        ex = discrepancy_exact(pts)
        spaced_bad += ex != Fraction(1, n)
        above += float(ex) > etk_bound(pts, n - 1)
    ok = mismatch == 0 and spaced_bad == 0 and above == 0
    record("9", ok, f"{mismatch} brute mismatches in 200 sets, {spaced_bad} equally spaced "
                    f"failures, {above} sets above the ETK bound")
    assert ok


# --- 10 -----------------------------------------------------------------------------

def test_c10_region_measures():
    worst = 0.0
    for k in (2, 3, 5):
        for eps in (0.0, 0.1, 0.5):
            for sign, s in (("minus", -1), ("plus", 1)):
                exact = (1 + s * eps) ** 2 / (k - 1)
                worst = max(worst, abs(region_measure_grid(ConvexRegion(k, eps, sign)) - exact))
    ok = record("10", worst <= 1e-3, f"max |grid - (1-+eps)^2/(k-1)| = {worst:.1e} <= 1e-3")
    assert ok


# --- 11 -----------------------------------------------------------------------------

def test_c11_short_interval_density(ctx):
    cset = unit_box(0.0, 0.5, 0.0, 0.5)
    dens, preds = [], []
    for d in range(10**6, 10**6 + 200):
        w = WindowSpec.build(ctx, 1, d, 0, 1)
        dens.append(short_interval_count(ctx, w, cset).density)
        preds.append(predicted_density(ctx, w, 0.25))
    mean, pred = float(np.mean(dens)), float(np.mean(preds))
    gap = abs(mean - pred) / pred
    ok = record("11", gap <= 0.15, f"mean density over 200 windows {mean:.6f} vs "
                                   f"{pred:.6f}, relative gap {gap:.2e} <= 0.15")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
