"""Exact solution counts for Piatetski-Shapiro differences.

``N_alpha(d)`` counts pairs m < n with floor(n**alpha) - floor(m**alpha) = d.
Writing n = m + r, a solution with step r needs d - 1 < f_r(m) < d + 1 where
f_r(x) = (x+r)**alpha - x**alpha is increasing.  On the part of that range
where f_r < d every difference is d-1 or d, and on the part where
f_r >= d it is d or d+1, so the number of hits equals a sum of differences
that telescopes to at most 2r floor evaluations.  The engine below does
this per r with double-double kernels, sending every undecided floor or
boundary to the exact routines in :mod:`pslab.certreal`.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _dd
from .certreal import (
    AlphaContext,
    asymptotic_constant,
    exact_floor_pow,
    floor_pow,
    gap_compare,
    gap_inverse,
    rational_power_ceil,
    _as_fraction,
    _ends,
    _prec,
)
from .errors import DomainError, PrecisionExhausted, ResourceLimit

__all__ = [
    "CountRecord",
    "ErrorTermConfig",
    "SweepReport",
    "oracle_pair_table",
    "pair_count",
    "kap_count",
    "kap_counts",
    "triplet_count",
    "error_term_E1",
    "error_term_E2",
    "default_constants",
    "tail_count_E0",
    "sweep",
    "window_kap_histogram",
]

ORACLE_CAP = 50_000_000       # longest sequence the brute oracle will build
CANDIDATE_CAP = 200_000_000   # longest per-r candidate scan on the exact path
_AMB_CAP = 4096


@dataclass
class CountRecord:
    d: int
    pair_count: int
    kap_counts: dict = field(default_factory=dict)
    r_histogram: dict = field(default_factory=dict)
    e1: int | None = None
    e2: int | None = None
    normalized_ratio: float = float("nan")


@dataclass(frozen=True)
class ErrorTermConfig:
    c1: float
    c2: float
    source: str = "user-supplied"

    def __post_init__(self):
        if not (self.c1 > 0 and self.c2 > 0):
            raise DomainError("error-term constants must be positive")
        if self.source not in ("default-derived", "user-supplied"):
            raise DomainError(f"unknown constant source {self.source!r}")


@dataclass
class SweepReport:
    alpha: str
    k: int
    d_range: tuple
    stride: int
    records: list
    window_mean_ratio: float
    target_constant: float
    relative_gap: float

    @property
    def empty(self) -> bool:
        return not self.records


def _check_d(d):
    if int(d) != d or d < 1:
        raise DomainError(f"d must be a positive integer, got {d}")
    return int(d)


def _ratio(count, d, ctx, k=2):
    return count / float(d) ** (ctx.beta - 1)


# ---------------------------------------------------------------------------
# brute-force oracle
# ---------------------------------------------------------------------------

def _oracle_length(ctx: AlphaContext, d_max: int) -> int:
    """Index n0 with f_1(n) >= d_max + 1 for all n >= n0 (so later gaps exceed d_max)."""
    t = d_max + 1
    n = max(1, int(((t / ctx.alpha) ** ctx.beta)))
    if n > 4 * ORACLE_CAP:
        return n
    while n > 1 and gap_compare(1, n - 1, t, ctx) >= 0:
        n -= 1
    while gap_compare(1, n, t, ctx) < 0:
        n += 1
    return n


def oracle_pair_table(ctx: AlphaContext, d_max: int, *, cap: int = ORACLE_CAP) -> dict:
    """Brute-force N_alpha(d) for 1 <= d <= d_max from the explicit sequence.

    Floors are computed by integer roots only, independently of the fast
    engine.  Raises ResourceLimit when the sequence would exceed ``cap``.
    """
    if int(d_max) != d_max or d_max < 1:
        raise DomainError(f"d_max must be a positive integer, got {d_max}")
    d_max = int(d_max)
    n0 = _oracle_length(ctx, d_max)
    if n0 > cap:
        raise ResourceLimit(
            f"oracle for alpha={ctx.alpha_exact}, d_max={d_max} needs ~{n0:.3g} terms (cap {cap})")
    # pairs (m, n) with m < n0; n may run past n0 while a_n <= a_{n0} + d_max
    p, q = ctx.p, ctx.q
    import gmpy2
    seq = [int(gmpy2.iroot(gmpy2.mpz(n) ** p, q)[0]) for n in range(1, n0 + 1)]
    a_top = seq[-1] + d_max
    n = n0 + 1
    while True:
        v = int(gmpy2.iroot(gmpy2.mpz(n) ** p, q)[0])
        if v > a_top:
            break
        seq.append(v)
        n += 1
    a = np.asarray(seq, dtype=np.int64)   # a[i] = floor((i+1)**alpha)
    counts = np.zeros(d_max + 1, dtype=np.int64)
    m_count = n0 - 1                      # starts m = 1 .. n0-1
    lag = 1
    while lag < len(a):
        # beyond f_lag(m) > d_max + 1 every difference exceeds d_max
        y = _dd.gap_inverse_float(float(lag), float(d_max + 1), ctx.alpha)
        L = min(m_count, len(a) - lag, int(y * (1 + 1e-9)) + 3)
        diff = a[lag:lag + L] - a[:L]
        if diff.size == 0 or diff.min() > d_max:
            break
        sel = diff[diff <= d_max]
        counts += np.bincount(sel, minlength=d_max + 1)[: d_max + 1]
        lag += 1
    return {d: int(counts[d]) for d in range(1, d_max + 1)}


# ---------------------------------------------------------------------------
# exact scalar path (any n, any alpha)
# ---------------------------------------------------------------------------

def _first_n_exact(ctx, r, t, strict):
    """Smallest n >= 1 with f_r(n) > t (strict) or >= t, decided exactly."""
    t = int(t)
    enc0 = gap_compare(r, 0, t, ctx)
    if enc0 > 0 or (enc0 == 0 and not strict):
        n = 1
    else:
        # an estimate good to well under one unit, then a certified walk
        y_hi = (t / (r * ctx.alpha)) ** ctx.beta + 2
        if y_hi < 2.0**48:
            n = max(1, int(_dd.gap_inverse_float(float(r), float(t), ctx.alpha)))
        else:
            tol = 2.0 ** -(max(int(y_hi), 1).bit_length() + 6)
            y = gap_inverse(r, t, ctx, rel_tol=min(1e-12, tol))
            n = max(1, math.floor(y.lo_exact))

    def ok(m):
        c = gap_compare(r, m, t, ctx)
        return c > 0 or (c == 0 and not strict)

    while n > 1 and ok(n - 1):
        n -= 1
    while not ok(n):
        n += 1
    return n


def _diffsum_exact(ctx, u, v, r):
    """Sum over u <= n < v of a(n+r) - a(n), telescoped to min(v-u, r) pairs."""
    if v <= u:
        return 0
    if v - u <= r:
        return sum(exact_floor_pow(n + r, ctx) - exact_floor_pow(n, ctx) for n in range(u, v))
    return sum(exact_floor_pow(v + i, ctx) - exact_floor_pow(u + i, ctx) for i in range(r))


def _pair_count_r_exact(ctx, d, r):
    u = _first_n_exact(ctx, r, d - 1, True)
    s = _first_n_exact(ctx, r, d, False)
    v = _first_n_exact(ctx, r, d + 1, False)
    ca = _diffsum_exact(ctx, u, s, r) - (d - 1) * (s - u)
    cb = (d + 1) * (v - s) - _diffsum_exact(ctx, s, v, r)
    return ca + cb


def _run_length_exact(ctx, n, r, d, kmax):
    """Number J of leading differences equal to d (capped at kmax-1), 0 if none."""
    prev = exact_floor_pow(n, ctx)
    j = 0
    while j < kmax - 1:
        nxt = exact_floor_pow(n + (j + 1) * r, ctx)
        if nxt - prev != d:
            break
        prev = nxt
        j += 1
    return j


def _kap_hist_r_exact(ctx, d, r, kmax, hist):
    u = _first_n_exact(ctx, r, d - 1, True)
    v = _first_n_exact(ctx, r, d + 1, False)
    if v - u > CANDIDATE_CAP:
        raise ResourceLimit(f"{v - u} candidate starts for r={r}, d={d} on the exact path")
    for n in range(u, v):
        j = _run_length_exact(ctx, n, r, d, kmax)
        if j:
            hist[j - 1] += 1


# ---------------------------------------------------------------------------
# fast per-d engine
# ---------------------------------------------------------------------------

def _r_max(ctx, d):
    """Largest r with r**alpha < d + 1."""
    return rational_power_ceil(Fraction(d + 1), 1 / ctx.alpha_exact) - 1


def _kernel_r_lo(ctx, d, r_max):
    """Smallest r from which every step up to r_max fits the float kernels."""
    if ctx.kernel_ok(int(((d + 2) / ctx.alpha) ** ctx.beta) + r_max + 3):
        return 1
    r = r_max
    while r >= 1:
        n_hi = (d + 2) / (r * ctx.alpha)
        n_hi = n_hi ** ctx.beta + r + 2
        if not ctx.kernel_ok(int(n_hi) + 1):
            return r + 1
        r -= 1
    return 1


def _amb_buffers(cap=_AMB_CAP):
    return (np.zeros(cap, np.int64), np.zeros(cap, np.int64),
            np.zeros(cap, np.int64), np.zeros(cap, np.int64), np.zeros(2, np.int64))


def _pair_hist(ctx: AlphaContext, d: int) -> np.ndarray:
    """counts[r] = number of solutions with step r, exactly."""
    r_max = _r_max(ctx, d)
    counts = np.zeros(r_max + 1, dtype=np.int64)
    if r_max < 1:
        return counts
    r_lo = _kernel_r_lo(ctx, d, r_max)
    for r in range(1, min(r_lo, r_max + 1)):
        counts[r] = _pair_count_r_exact(ctx, d, r)
    if r_lo <= r_max:
        cap = _AMB_CAP
        while True:
            counts[r_lo:] = 0
            bad = np.zeros(r_max + 1, dtype=np.bool_)
            amb_r, amb_n, amb_est, amb_w, namb = _amb_buffers(cap)
            _dd.pair_counts_for_d(d, r_lo, r_max, ctx.p, ctx.q, ctx.alpha,
                                  counts, bad, amb_r, amb_n, amb_est, amb_w, namb)
            if not namb[1]:
                break
            cap *= 16
        for i in range(int(namb[0])):
            r = int(amb_r[i])
            if bad[r]:
                continue
            exact = exact_floor_pow(int(amb_n[i]), ctx)
            counts[r] += int(amb_w[i]) * (exact - int(amb_est[i]))
        for r in np.flatnonzero(bad):
            counts[r] = _pair_count_r_exact(ctx, d, int(r))
    return counts


def pair_count(ctx: AlphaContext, d: int) -> CountRecord:
    """Exact N_alpha(d) with its per-step histogram."""
    d = _check_d(d)
    counts = _pair_hist(ctx, d)
    total = int(counts.sum())
    hist = {int(r): int(c) for r, c in enumerate(counts) if r >= 1 and c}
    return CountRecord(d=d, pair_count=total, kap_counts={2: total},
                       r_histogram=hist, normalized_ratio=_ratio(total, d, ctx))


def _run_hist(ctx: AlphaContext, d: int, kmax: int) -> np.ndarray:
    """hist[J-1] = number of starts with exactly J (capped at kmax-1) equal steps."""
    hist = np.zeros(kmax - 1, dtype=np.int64)
    r_max = _r_max(ctx, d)
    if r_max < 1:
        return hist
    r_lo = _kernel_r_lo(ctx, d, r_max)
    for r in range(1, min(r_lo, r_max + 1)):
        _kap_hist_r_exact(ctx, d, r, kmax, hist)
    if r_lo <= r_max:
        bad = np.zeros(r_max + 1, dtype=np.bool_)
        cap = _AMB_CAP
        while True:
            hist_k = np.zeros(kmax - 1, dtype=np.int64)
            amb_r, amb_n = np.zeros(cap, np.int64), np.zeros(cap, np.int64)
            namb = np.zeros(2, np.int64)
            bad[:] = False
            _dd.kap_runs_for_d(d, r_lo, r_max, kmax, ctx.p, ctx.q, ctx.alpha,
                               hist_k, bad, amb_r, amb_n, namb)
            if not namb[1]:
                break
            cap *= 16
        hist += hist_k
        for i in range(int(namb[0])):
            if bad[amb_r[i]]:
                continue
            j = _run_length_exact(ctx, int(amb_n[i]), int(amb_r[i]), d, kmax)
            if j:
                hist[j - 1] += 1
        for r in np.flatnonzero(bad):
            _kap_hist_r_exact(ctx, d, int(r), kmax, hist)
    return hist


def _kap_from_hist(hist, k):
    """N_k = number of starts whose run reaches at least k-1 steps."""
    return int(hist[k - 2:].sum())


def kap_counts(ctx: AlphaContext, d: int, kmax: int) -> dict:
    """{k: N_{alpha,k}(d)} for 2 <= k <= kmax."""
    d = _check_d(d)
    if int(kmax) != kmax or kmax < 2:
        raise DomainError(f"k must be an integer >= 2, got {kmax}")
    hist = _run_hist(ctx, d, int(kmax))
    return {k: _kap_from_hist(hist, k) for k in range(2, int(kmax) + 1)}


def kap_count(ctx: AlphaContext, k: int, d: int) -> int:
    """N_{alpha,k}(d): starts (n, r) with floor((n+jr)**alpha) = floor(n**alpha) + jd, j=1..k-1."""
    d = _check_d(d)
    if int(k) != k or k < 2:
        raise DomainError(f"k must be an integer >= 2, got {k}")
    if k == 2:
        return pair_count(ctx, d).pair_count
    return kap_counts(ctx, d, int(k))[int(k)]


def triplet_count(ctx: AlphaContext, x: int) -> int:
    """Triplets (l, m, n) with l < x and floor(l**a) + floor(m**a) = floor(n**a)."""
    if int(x) != x or x < 1:
        raise DomainError(f"x must be a positive integer, got {x}")
    return sum(pair_count(ctx, floor_pow(l, ctx)).pair_count for l in range(1, int(x)))


def tail_count_E0(ctx: AlphaContext, d: int, R: int, record: CountRecord | None = None) -> int:
    """Solutions with step r > R, read off the per-step histogram."""
    if R < 0:
        raise DomainError("R must be >= 0")
    rec = record if record is not None else pair_count(ctx, d)
    return sum(c for r, c in rec.r_histogram.items() if r > R)


# ---------------------------------------------------------------------------
# error terms
# ---------------------------------------------------------------------------

_PROBE_D = (10**3, 10**4, 10**5, 10**6)


def default_constants(ctx: AlphaContext, probe_d=_PROBE_D, probe_r=None) -> ErrorTermConfig:
    """Constants for E1/E2 derived from alpha.

    c1 is twice the largest observed F_r(d-1) r**beta / d**(beta-1), with
    F_r(x) = f_r^-1(x+2) - f_r^-1(x), over a fixed grid of d and dyadic r
    up to d**(1/alpha)/4.  c2 = 2 (4/alpha)**beta.
    """
    probe_d = list(probe_d)
    if not probe_d:
        raise DomainError("empty probe grid for default constants")
    b = ctx.beta
    best = 0.0
    for d in probe_d:
        d = _check_d(d)
        rs = probe_r if probe_r is not None else \
            [2**i for i in range(0, 64) if 2**i <= d ** (1 / ctx.alpha) / 4] or [1]
        for r in rs:
            # F_r(d-1) = f_r^-1(d+1) - f_r^-1(d-1); exact enough from the enclosure mids
            hi = gap_inverse(r, d + 1, ctx).mid_exact
            lo = gap_inverse(r, d - 1, ctx).mid_exact if d - 1 >= r ** ctx.alpha else Fraction(0)
            best = max(best, float(hi - lo) * r ** b / d ** (b - 1))
    if best <= 0:
        raise DomainError("probe grid produced no samples")
    c2 = 2 * (4 / ctx.alpha) ** b
    return ErrorTermConfig(c1=2 * best, c2=c2, source="default-derived")


def _float_margin(x):
    return 64 * 2.0 ** -52 * max(1.0, abs(x)) + 1e-12


def error_term_E1(ctx: AlphaContext, d: int, cfg: ErrorTermConfig) -> int:
    """#{r <= d**(1/alpha)/4 : {f_r^-1(d)} + c1 d**(beta-1)/r**beta > 1}."""
    d = _check_d(d)
    p, q = ctx.p, ctx.q
    # r <= d**(q/p)/4  <=>  (4r)**p <= d**q
    r_top = rational_power_ceil(Fraction(d) ** q, Fraction(1, p)) // 4 + 1
    while r_top >= 1 and (4 * r_top) ** p > d ** q:
        r_top -= 1
    b = ctx.beta
    count = 0
    for r in range(1, r_top + 1):
        thr = 1.0 - cfg.c1 * float(d) ** (b - 1) / float(r) ** b
        if thr <= 0:
            count += 1
            continue
        y = _dd.gap_inverse_float(float(r), float(d), ctx.alpha)
        fr = y - math.floor(y)
        if abs(fr - thr) > _float_margin(y) + 1e-9 and min(fr, 1 - fr) > _float_margin(y) + 1e-9:
            count += fr > thr
            continue
        count += _e1_certified(ctx, d, r, cfg.c1)
    return count


def _threshold_enclosure(ctx, d, r, c1, bits=192):
    """1 - c1 * d**(beta-1) / r**beta as exact Fraction endpoints."""
    from .certreal import _to_fraction_mpf
    with _prec(bits) as (M, I):
        beta = I.mpf(ctx.beta_exact.numerator) / ctx.beta_exact.denominator
        val = 1 - I.mpf(c1) * I.mpf(d) ** (beta - 1) / I.mpf(r) ** beta
        lo, hi = _ends(val, M)
    return _to_fraction_mpf(lo), _to_fraction_mpf(hi)


def _e1_certified(ctx, d, r, c1):
    t_lo, t_hi = _threshold_enclosure(ctx, d, r, c1)
    tol = 1e-12
    for _ in range(8):
        enc = gap_inverse(r, d, ctx, rel_tol=tol)
        fl = enc.floor()
        if fl is not None:
            f_lo, f_hi = enc.lo_exact - fl, enc.hi_exact - fl
            if f_lo > t_hi:
                return 1
            if f_hi < t_lo:
                return 0
        tol *= 2.0 ** -40
    raise PrecisionExhausted(f"E1 threshold undecided for r={r}, d={d}", r=r, d=d)


def error_term_E2(ctx: AlphaContext, d: int, cfg: ErrorTermConfig) -> int:
    """#{n < c2 d**(1/alpha) : {(n**alpha + d)**(1/alpha)} + 2 d**(1/alpha-1) > 1}."""
    d = _check_d(d)
    p, q = ctx.p, ctx.q
    c = _as_fraction(cfg.c2)
    # n < c d**(q/p)  <=>  n**p < c**p d**q
    bound = c ** p * Fraction(d) ** q
    n_top = rational_power_ceil(bound, Fraction(1, p))
    while n_top >= 1 and Fraction(n_top) ** p >= bound:
        n_top -= 1
    if n_top < 1:
        return 0
    a = ctx.alpha
    thr = 1.0 - 2.0 * float(d) ** (1 / a - 1)
    n = np.arange(1, n_top + 1, dtype=np.float64)
    z = (n ** a + d) ** (1 / a)
    fr = z - np.floor(z)
    margin = 64 * 2.0 ** -52 * np.maximum(1.0, z) + 1e-12
    unsure = (np.abs(fr - thr) <= margin) | (fr <= margin) | (1 - fr <= margin)
    count = int(np.count_nonzero((fr > thr) & ~unsure))
    for i in np.flatnonzero(unsure):
        count += _e2_certified(ctx, d, int(i) + 1)
    return count


def _e2_certified(ctx, d, n):
    from .certreal import _perfect_power_value, _to_fraction_mpf
    bits = ctx.precision.initial_bits
    with _prec(256) as (M, I):
        t_lo, t_hi = _ends(1 - 2 * I.mpf(d) ** (I.mpf(ctx.q) / ctx.p - 1), M)
    t_lo, t_hi = _to_fraction_mpf(t_lo), _to_fraction_mpf(t_hi)
    for bits in ctx.precision.ladder(128):
        with _prec(bits) as (M, I):
            a = I.mpf(ctx.p) / ctx.q
            z = (I.mpf(n) ** a + d) ** (I.mpf(ctx.q) / ctx.p)
            lo, hi = (_to_fraction_mpf(v) for v in _ends(z, M))
        fl = math.floor(lo)
        if math.floor(hi) == fl:
            if lo - fl > t_hi:
                return 1
            if hi - fl < t_lo:
                return 0
        elif hi - math.floor(hi) < Fraction(1, 2):
            # z may be the integer m = floor(hi): then m**alpha - n**alpha = d exactly
            m = math.floor(hi)
            pm, pn = _perfect_power_value(m, ctx), _perfect_power_value(n, ctx)
            if pm is not None and pn is not None and pm - pn == d:
                return int(0 > t_hi)
    raise PrecisionExhausted(f"E2 threshold undecided for n={n}, d={d}", n=n, d=d, bits=bits)


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

def window_kap_histogram(ctx: AlphaContext, d_lo: int, d_hi: int, kmax: int,
                         workers: int = 1) -> np.ndarray:
    """Run-length histograms for every d in [d_lo, d_hi] from one scan per step r.

    Returns hist with hist[d - d_lo, J - 1] = number of starts whose first J
    differences (J capped at kmax-1) all equal d.  Raises ResourceLimit if
    some step needs arguments beyond the float kernels.
    """
    r_max = _r_max(ctx, d_hi)
    if _kernel_r_lo(ctx, d_hi + 1, r_max) > 1:
        raise ResourceLimit("window scan needs arguments beyond the double-double kernels")
    p, q, a = ctx.p, ctx.q, ctx.alpha
    span = d_hi - d_lo + 1

    def one(r):
        u, ok1 = _dd.first_n(r, d_lo - 1, True, p, q, a)
        v, ok2 = _dd.first_n(r, d_hi + 1, False, p, q, a)
        if not ok1:
            u = _first_n_exact(ctx, r, d_lo - 1, True)
        if not ok2:
            v = _first_n_exact(ctx, r, d_hi + 1, False)
        hist = np.zeros((span, kmax - 1), dtype=np.int64)
        if v <= u:
            return hist
        empty = np.zeros(0, np.int64)
        amb = np.zeros(_AMB_CAP, np.int64)
        namb = np.zeros(2, np.int64)
        _dd.scan_starts(u, v, r, kmax, d_lo, d_hi, p, q, a, hist, empty, empty, amb, namb)
        if namb[0] == 0:
            return hist
        if namb[1]:
            raise ResourceLimit(f"too many undecided floors in window scan for r={r}")
        # rerun with exact values for the undecided floors
        ov_n = np.unique(amb[: namb[0]])
        ov_val = np.array([exact_floor_pow(int(n), ctx) for n in ov_n], dtype=np.int64)
        hist[:] = 0
        namb[:] = 0
        _dd.scan_starts(u, v, r, kmax, d_lo, d_hi, p, q, a, hist, ov_n, ov_val, amb, namb)
        return hist

    total = np.zeros((span, kmax - 1), dtype=np.int64)
    rs = range(1, r_max + 1)
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            for h in ex.map(one, rs):
                total += h
    else:
        for r in rs:
            total += one(r)
    return total


def sweep(ctx: AlphaContext, k: int, d_lo: int, d_hi: int, stride: int = 1, *,
          workers: int = 1, error_terms: ErrorTermConfig | None = None,
          max_records: int = 10**7, on_record=None) -> SweepReport:
    """CountRecords for d = d_lo, d_lo+stride, ... <= d_hi, in order of d.

    ``on_record`` is called with each record as soon as it (and all earlier
    ones) are known, which lets the CLI stream rows.
    """
    if int(k) != k or k < 2:
        raise DomainError(f"k must be an integer >= 2, got {k}")
    if int(stride) != stride or stride < 1:
        raise DomainError(f"stride must be a positive integer, got {stride}")
    k, stride = int(k), int(stride)
    target = asymptotic_constant(ctx, k)
    ds = list(range(int(d_lo), int(d_hi) + 1, stride)) if d_hi >= d_lo else []
    if ds and ds[0] < 1:
        raise DomainError("d_lo must be >= 1")
    if len(ds) > max_records:
        raise ResourceLimit(f"{len(ds)} records requested (cap {max_records})")

    window = None
    if k > 2 and stride == 1 and len(ds) > 16:
        try:
            window = window_kap_histogram(ctx, ds[0], ds[-1], k, workers)
        except ResourceLimit:
            window = None

    def one(d):
        counts = _pair_hist(ctx, d)
        total = int(counts.sum())
        kaps = {2: total}
        if k > 2:
            if window is not None:
                hist = window[d - ds[0]]
                if int(hist.sum()) != total:
                    raise RuntimeError(f"engines disagree at d={d}: {int(hist.sum())} vs {total}")
            else:
                hist = _run_hist(ctx, d, k)
            kaps[k] = _kap_from_hist(hist, k)
        rec = CountRecord(d=d, pair_count=total, kap_counts=kaps,
                          r_histogram={int(r): int(c) for r, c in enumerate(counts) if r and c},
                          normalized_ratio=_ratio(kaps[k], d, ctx))
        if error_terms is not None:
            rec.e1 = error_term_E1(ctx, d, error_terms)
            rec.e2 = error_term_E2(ctx, d, error_terms)
        return rec

    records = []
    if workers > 1 and len(ds) > 1:
        with ThreadPoolExecutor(workers) as ex:
            for rec in ex.map(one, ds):
                records.append(rec)
                if on_record:
                    on_record(rec)
    else:
        for d in ds:
            rec = one(d)
            records.append(rec)
            if on_record:
                on_record(rec)

    if records:
        mean = math.fsum(r.normalized_ratio for r in records) / len(records)
        gap = abs(mean - target) / target
    else:
        mean = gap = float("nan")
    return SweepReport(alpha=str(ctx.alpha_exact), k=k, d_range=(int(d_lo), int(d_hi)),
                       stride=stride, records=records, window_mean_ratio=mean,
                       target_constant=target, relative_gap=gap)
