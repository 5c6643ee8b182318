import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from pslab.certreal import AlphaContext, floor_pow
from pslab.counting import (
    ErrorTermConfig,
    default_constants,
    error_term_E1,
    error_term_E2,
    kap_count,
    kap_counts,
    oracle_pair_table,
    pair_count,
    sweep,
    tail_count_E0,
    triplet_count,
    window_kap_histogram,
)
from pslab.errors import DomainError, ResourceLimit

from conftest import brute_pairs, brute_sequence


def brute_kap(seq, d, k):
    """Index progressions n, n+r, ..., n+(k-1)r whose values step by exactly d."""
    total = 0
    for i in range(len(seq)):
        for r in range(1, len(seq) - i):
            gap = seq[i + r] - seq[i]
            if gap > d:
                break
            if gap == d and i + (k - 1) * r < len(seq) and all(
                    seq[i + j * r] - seq[i + (j - 1) * r] == d for j in range(2, k)):
                total += 1
    return total


# --- oracle table ---------------------------------------------------------------

def test_oracle_examples(ctx15):
    assert oracle_pair_table(ctx15, 3) == {1: 1, 2: 0, 3: 4}
    assert oracle_pair_table(ctx15, 1) == {1: 1}
    with pytest.raises(DomainError):
        oracle_pair_table(ctx15, 0)


def test_oracle_cap_raises(ctx12):
    with pytest.raises(ResourceLimit):
        oracle_pair_table(ctx12, 3000)


@pytest.mark.parametrize("alpha,dmax,length", [("1.5", 200, 20000), ("1.7", 200, 2000),
                                               ("1.2", 10, 120000)])
def test_oracle_matches_integer_brute_force(alpha, dmax, length):
    ctx = AlphaContext.from_value(alpha)
    seq = brute_sequence(ctx.alpha_exact, length)
    # the sequence is long enough once its last gap exceeds dmax
    assert seq[-1] - seq[-2] > dmax
    assert oracle_pair_table(ctx, dmax) == brute_pairs(seq, dmax)


# --- pair and progression counts --------------------------------------------------

def test_pair_count_examples(ctx15):
    r1, r2, r3 = (pair_count(ctx15, d) for d in (1, 2, 3))
    assert (r1.pair_count, r1.r_histogram) == (1, {1: 1})
    assert r2.pair_count == 0
    assert (r3.pair_count, r3.r_histogram) == (4, {1: 4})


def test_kap_examples(ctx15):
    assert kap_count(ctx15, 2, 3) == 4
    assert kap_count(ctx15, 3, 3) == 3
    assert kap_count(ctx15, 10, 1) == 0
    with pytest.raises(DomainError):
        kap_count(ctx15, 1, 3)


@pytest.mark.parametrize("alpha", ["1.5", "1.7", "1.2"])
def test_pair_count_equals_oracle(alpha):
    ctx = AlphaContext.from_value(alpha)
    dmax = 25 if alpha == "1.2" else 800
    table = oracle_pair_table(ctx, dmax)
    assert all(pair_count(ctx, d).pair_count == table[d] for d in range(1, dmax + 1))


@pytest.mark.parametrize("alpha", ["1.5", "1.7"])
def test_kap_counts_match_brute(alpha):
    ctx = AlphaContext.from_value(alpha)
    seq = brute_sequence(ctx.alpha_exact, 20000)
    assert seq[-1] - seq[-2] > 150
    for d in (1, 3, 7, 20, 57, 150):
        got = kap_counts(ctx, d, 5)
        for k in range(2, 6):
            assert got[k] == brute_kap(seq, d, k), (d, k)


@settings(max_examples=30, deadline=None)
@given(d=st.integers(1, 20000), alpha=st.sampled_from(["1.5", "1.7", "1.45"]))
def test_record_invariants(d, alpha):
    ctx = AlphaContext.from_value(alpha)
    rec = pair_count(ctx, d)
    assert rec.pair_count == sum(rec.r_histogram.values())
    assert all(r ** ctx.alpha < d + 1 for r in rec.r_histogram)
    ks = kap_counts(ctx, d, 4)
    assert ks[2] == rec.pair_count
    assert ks[2] >= ks[3] >= ks[4]


def test_count_insensitive_to_inverse_tolerance(ctx17, monkeypatch):
    import pslab.counting as counting
    from pslab import certreal

    base = [pair_count(ctx17, d).pair_count for d in range(1000, 1040)]
    orig = certreal.gap_inverse
    monkeypatch.setattr(counting, "gap_inverse",
                        lambda r, t, ctx, rel_tol=1e-12: orig(r, t, ctx, rel_tol=rel_tol / 2))
    assert [pair_count(ctx17, d).pair_count for d in range(1000, 1040)] == base


# --- triplets and tails ---------------------------------------------------------------

def test_triplet_examples(ctx15):
    assert triplet_count(ctx15, 1) == 0
    assert triplet_count(ctx15, 2) == 1
    assert triplet_count(ctx15, 3) == 1


def test_triplet_count_matches_direct_enumeration(ctx15):
    a = ctx15.alpha_exact
    # gaps past n = 20000 exceed floor(29**1.5), so no triplet with l < 30 is missed
    seq = brute_sequence(a, 20000)
    vals = set(seq)
    assert seq[-1] - seq[-2] > seq[28]
    for x in (5, 12, 30):
        direct = sum(1 for l in range(1, x) for m in seq if seq[l - 1] + m in vals)
        assert triplet_count(ctx15, x) == direct


def test_tail_examples(ctx15):
    assert tail_count_E0(ctx15, 3, 0) == 4
    assert tail_count_E0(ctx15, 3, 1) == 0
    d = 5000
    R = math.ceil((d + 1) ** (1 / 1.5))
    assert tail_count_E0(ctx15, d, R) == 0


# --- error terms -------------------------------------------------------------------

def test_default_constants(ctx15, ctx12):
    assert abs(default_constants(ctx15).c2 - 2 * (4 / 1.5) ** 2) < 1e-12
    assert abs(default_constants(ctx12, probe_d=(10**3,)).c2 - 823.0) < 0.1
    assert default_constants(ctx15).source == "default-derived"
    with pytest.raises(DomainError):
        default_constants(ctx15, probe_d=())


def test_error_terms_small_d(ctx15):
    cfg = default_constants(ctx15)
    assert all(error_term_E1(ctx15, d, cfg) == 0 for d in range(1, 8))
    assert error_term_E1(ctx15, 100, ErrorTermConfig(1e-9, 1.0, "user-supplied")) == 0
    assert error_term_E2(ctx15, 10, ErrorTermConfig(1.0, 0.1, "user-supplied")) == 0


def test_error_term_trend(ctx15):
    cfg = default_constants(ctx15)
    b = ctx15.beta
    for fn in (error_term_E1, error_term_E2):
        lo = fn(ctx15, 10**3, cfg) / 10**3 ** (b - 1)
        hi = fn(ctx15, 10**4, cfg) / 10**4 ** (b - 1)
        assert hi < lo


# --- sweeps ----------------------------------------------------------------------------

def test_sweep_empty_and_single(ctx15):
    rep = sweep(ctx15, 2, 10, 9)
    assert rep.records == [] and math.isnan(rep.relative_gap)
    rep = sweep(ctx15, 2, 10, 20, stride=50)
    assert [r.d for r in rep.records] == [10]


def test_window_scan_matches_per_d(ctx15):
    hist = window_kap_histogram(ctx15, 2000, 2040, 4)
    for d in (2000, 2017, 2040):
        want = kap_counts(ctx15, d, 4)
        for k in (2, 3, 4):
            got = int(hist[d - 2000][k - 2:].sum())
            assert got == want[k], (d, k)


def test_sweep_k3_window_path_and_workers(ctx15):
    a = sweep(ctx15, 3, 3000, 3040, workers=1)
    b = sweep(ctx15, 3, 3000, 3040, workers=3)
    assert [r.kap_counts for r in a.records] == [r.kap_counts for r in b.records]
    assert all(r.kap_counts[3] == kap_count(ctx15, 3, r.d) for r in a.records[::10])
