"""Double-double kernels for bulk floor/fractional-part evaluation of n**(p/q).

Every kernel returns an ambiguity flag next to each value.  A value is
flagged when the double-double estimate lies within ``REL_TOL * |x|`` of
an integer boundary (or a comparison threshold); callers resolve flagged
entries with the exact scalar routines in :mod:`pslab.certreal`.

Integer arguments are passed as float64 and must stay below 2**53.
"""
import math

import numpy as np
from numba import njit

# Relative error bound of pow_dd, with a wide safety factor.  The generic
# path does one Newton step from a libm pow estimate, so its error is about
# q/2 * (1e-14)**2; the p/q = 3/2 path is exact up to a few dd roundings.
REL_TOL = 1e-25
# Largest integer argument accepted by the kernels.
N_LIMIT = float(2**53)

_SPLITTER = 134217729.0  # 2**27 + 1


@njit(cache=True, nogil=True)
def two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


@njit(cache=True, nogil=True)
def quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


@njit(cache=True, nogil=True)
def _split(a):
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


@njit(cache=True, nogil=True)
def two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


@njit(cache=True, nogil=True)
def dd_add(ah, al, bh, bl):
    s, e = two_sum(ah, bh)
    t, f = two_sum(al, bl)
    e += t
    s, e = quick_two_sum(s, e)
    e += f
    return quick_two_sum(s, e)


@njit(cache=True, nogil=True)
def dd_mul(ah, al, bh, bl):
    p, e = two_prod(ah, bh)
    e += ah * bl + al * bh
    return quick_two_sum(p, e)


@njit(cache=True, nogil=True)
def dd_div(ah, al, bh, bl):
    q1 = ah / bh
    ph, pl = dd_mul(q1, 0.0, bh, bl)
    rh, rl = dd_add(ah, al, -ph, -pl)
    q2 = rh / bh
    ph, pl = dd_mul(q2, 0.0, bh, bl)
    rh, rl = dd_add(rh, rl, -ph, -pl)
    q3 = rh / bh
    h, l = quick_two_sum(q1, q2)
    return dd_add(h, l, q3, 0.0)


@njit(cache=True, nogil=True)
def dd_ipow(xh, xl, k):
    rh, rl = 1.0, 0.0
    bh, bl = xh, xl
    while k > 0:
        if k & 1:
            rh, rl = dd_mul(rh, rl, bh, bl)
        k >>= 1
        if k:
            bh, bl = dd_mul(bh, bl, bh, bl)
    return rh, rl


@njit(cache=True, nogil=True)
def pow_dd(x, p, q, alpha):
    """x**(p/q) as a double-double; x is a nonnegative integer-valued float."""
    if x == 0.0:
        return 0.0, 0.0
    if p == 3 and q == 2:
        s = math.sqrt(x)
        sh, sl = two_prod(s, s)
        rho = (x - sh) - sl
        h, l = two_prod(x, s)
        l += x * (rho / (2.0 * s))
        return quick_two_sum(h, l)
    y0 = x ** alpha
    yh, yl = dd_ipow(y0, 0.0, q)
    ph, pl = dd_ipow(x, 0.0, p)
    th, tl = dd_div(yh, yl, ph, pl)
    delta = (th - 1.0) + tl
    return two_sum(y0, -(y0 * delta / q))


@njit(cache=True, nogil=True)
def floor_frac(h, l):
    """Split a double-double (|h| < 2**62) into (floor as int64, fractional part)."""
    fh = math.floor(h)
    if fh == h:
        fl = math.floor(l)
        return np.int64(h) + np.int64(fl), l - fl
    ival = np.int64(fh)
    fr = (h - fh) + l
    if fr < 0.0:
        ival -= 1
        fr += 1.0
    elif fr >= 1.0:
        ival += 1
        fr -= 1.0
    return ival, fr


@njit(cache=True, nogil=True)
def floor_pow_one(x, p, q, alpha):
    """Return (floor(x**alpha) as int64, ambiguous)."""
    if p == 3 and q == 2:
        # perfect squares give exact results; recognise them directly
        s = math.sqrt(x)
        if s == math.floor(s) and s * s == x:
            return np.int64(x) * np.int64(s), False
    h, l = pow_dd(x, p, q, alpha)
    fl, fr = floor_frac(h, l)
    tol = abs(h) * REL_TOL + 1e-300
    return fl, (fr < tol) or (1.0 - fr < tol)


@njit(cache=True, nogil=True)
def floor_pow_array(ns, p, q, alpha, out, amb):
    for i in range(ns.shape[0]):
        fl, a = floor_pow_one(float(ns[i]), p, q, alpha)
        out[i] = fl
        amb[i] = a


@njit(cache=True, nogil=True)
def frac_pairs(n0, count, r, p, q, alpha, fx, fy, rad):
    """Fractional parts of n**alpha and r*alpha*n**(alpha-1) for n0 <= n < n0+count.

    ``rad`` receives an absolute error radius for each pair.
    """
    rp = float(r * p)
    for i in range(count):
        x = float(n0 + i)
        h, l = pow_dd(x, p, q, alpha)
        _, fr = floor_frac(h, l)
        fx[i] = fr
        wh, wl = dd_mul(h, l, rp, 0.0)
        wh, wl = dd_div(wh, wl, q * x, 0.0)
        _, gr = floor_frac(wh, wl)
        fy[i] = gr
        rad[i] = max(abs(h), abs(wh)) * REL_TOL + 4e-16


@njit(cache=True, nogil=True)
def qth_root_exact(n, q):
    """(True, s) when the integer n equals s**q, else (False, 0)."""
    if n < 0:
        return False, np.int64(0)
    s0 = np.int64(round(float(n) ** (1.0 / q)))
    for s in range(max(s0 - 1, 0), s0 + 2):
        v = np.int64(1)
        for _ in range(q):
            v *= s
            if v > n:
                break
        if v == n:
            return True, np.int64(s)
    return False, np.int64(0)


@njit(cache=True, nogil=True)
def gap_cmp(n, r, t, p, q, alpha):
    """Sign of f_r(n) - t as -1/0/1, or 2 when undecided at double-double accuracy."""
    e1, s1 = qth_root_exact(n + r, q)
    if e1:
        e0, s0 = qth_root_exact(n, q)
        if e0:
            # both powers are integers: s1**p - s0**p exactly
            v1 = np.int64(1)
            v0 = np.int64(1)
            for _ in range(p):
                v1 *= s1
                v0 *= s0
            diff = float(v1 - v0)
            if diff > t:
                return 1
            if diff < t:
                return -1
            return 0
    ah, al = pow_dd(float(n + r), p, q, alpha)
    bh, bl = pow_dd(float(n), p, q, alpha)
    dh, dl = dd_add(ah, al, -bh, -bl)
    dh, dl = dd_add(dh, dl, -t, 0.0)
    v = dh + dl
    tol = abs(ah) * REL_TOL + 1e-300
    if v > tol:
        return 1
    if v < -tol:
        return -1
    return 2


@njit(cache=True, nogil=True)
def gap_value(y, r, alpha):
    """f_r(y) = (y+r)**alpha - y**alpha in float, cancellation-free."""
    if y <= 0.0:
        return r ** alpha
    if y < r:
        return (y + r) ** alpha - y ** alpha
    return y ** alpha * math.expm1(alpha * math.log1p(r / y))


@njit(cache=True, nogil=True)
def gap_slope(y, r, alpha):
    if y <= 0.0:
        return alpha * r ** (alpha - 1.0)
    if y < r:
        return alpha * ((y + r) ** (alpha - 1.0) - y ** (alpha - 1.0))
    return alpha * y ** (alpha - 1.0) * math.expm1((alpha - 1.0) * math.log1p(r / y))


@njit(cache=True, nogil=True)
def gap_inverse_float(r, t, alpha):
    """Float estimate of f_r^{-1}(t) by Newton from the left (f_r is concave)."""
    if t <= r ** alpha:
        return 0.0
    beta = 1.0 / (alpha - 1.0)
    # midpoint form of the mean value bracket; Newton then needs 1-3 steps
    y = max(0.0, (t / (r * alpha)) ** beta - 0.5 * r)
    for _ in range(100):
        g = gap_value(y, r, alpha) - t
        step = g / gap_slope(y, r, alpha)
        y_new = y - step
        if y_new < 0.0:
            y_new = 0.0
        if abs(y_new - y) <= 1e-13 * max(1.0, y):
            y = y_new
            break
        y = y_new
    return y


@njit(cache=True, nogil=True)
def first_n(r, t, strict, p, q, alpha):
    """Smallest n >= 1 with f_r(n) > t (strict) or f_r(n) >= t.

    Returns (n, ok); ok is False when a comparison was undecided.
    """
    y = gap_inverse_float(float(r), float(t), alpha)
    return first_n_from(r, t, strict, y, p, q, alpha)


@njit(cache=True, nogil=True)
def first_n_from(r, t, strict, y, p, q, alpha):
    """first_n with a caller-supplied estimate y of f_r^{-1}(t)."""
    n = max(1, np.int64(math.floor(max(y, 0.0))))
    # walk down while the predecessor also satisfies the predicate
    while n > 1:
        c = gap_cmp(n - 1, r, t, p, q, alpha)
        if c == 2:
            return n, False
        if c > 0 or (c == 0 and not strict):
            n -= 1
        else:
            break
    while True:
        c = gap_cmp(n, r, t, p, q, alpha)
        if c == 2:
            return n, False
        if c > 0 or (c == 0 and not strict):
            return n, True
        n += 1


@njit(cache=True, nogil=True)
def _diffsum(u, v, r, p, q, alpha, sign, ri, amb_r, amb_n, amb_est, amb_w, namb):
    """Sum of a(n+r) - a(n) over u <= n < v, a(n) = floor(n**alpha).

    Ambiguous floors are appended to the amb_* buffers with weight
    ``sign * (+1 | -1)``; namb[0] counts them (capacity overflow sets
    namb[1]).
    """
    if v <= u:
        return np.int64(0)
    total = np.int64(0)
    if v - u <= r:
        lo1, lo2, length = u + r, u, v - u
    else:
        lo1, lo2, length = v, u, r
    for i in range(length):
        for which in range(2):
            n = lo1 + i if which == 0 else lo2 + i
            w = 1 if which == 0 else -1
            val, a = floor_pow_one(float(n), p, q, alpha)
            total += w * val
            if a:
                k = namb[0]
                if k < amb_r.shape[0]:
                    amb_r[k] = ri
                    amb_n[k] = n
                    amb_est[k] = val
                    amb_w[k] = sign * w
                    namb[0] = k + 1
                else:
                    namb[1] = 1
    return total


@njit(cache=True, nogil=True)
def pair_counts_for_d(d, r_lo, r_max, p, q, alpha, counts, bad, amb_r, amb_n, amb_est, amb_w, namb):
    """Per-r solution counts of floor((n+r)^a) - floor(n^a) = d, n >= 1.

    Uses the telescoping identity on the two ranges where d-1 < f_r(n) < d
    and d <= f_r(n) < d+1.  ``bad[r]`` is set when a range boundary could
    not be decided; such r must be recounted by the caller.
    """
    for r in range(r_lo, r_max + 1):
        y = gap_inverse_float(float(r), float(d), alpha)
        step = 1.0 / gap_slope(y, float(r), alpha)
        u, ok1 = first_n_from(r, d - 1, True, y - step, p, q, alpha)
        s, ok2 = first_n_from(r, d, False, y, p, q, alpha)
        v, ok3 = first_n_from(r, d + 1, False, y + step, p, q, alpha)
        if not (ok1 and ok2 and ok3):
            bad[r] = True
            continue
        ca = _diffsum(u, s, r, p, q, alpha, 1, r, amb_r, amb_n, amb_est, amb_w, namb)
        ca -= (d - 1) * (s - u)
        cb = (d + 1) * (v - s)
        # this sum enters with a minus sign, hence weight -1
        cb -= _diffsum(s, v, r, p, q, alpha, -1, r, amb_r, amb_n, amb_est, amb_w, namb)
        counts[r] = ca + cb
    return 0


@njit(cache=True, nogil=True)
def kap_runs_for_d(d, r_lo, r_max, kmax, p, q, alpha, hist, bad, amb_r, amb_n, namb):
    """Run-length histogram of solutions with difference d, per start (n, r).

    For each r the candidate starts are d-1 < f_r(n) < d+1.  A start with
    a(n+r) - a(n) = d whose differences stay equal to d for J steps
    (1 <= J <= kmax-1) adds one to hist[J-1].  Starts that touched an
    ambiguous floor are not counted; they are listed in amb_r/amb_n for an
    exact recount by the caller.
    """
    for r in range(r_lo, r_max + 1):
        y = gap_inverse_float(float(r), float(d), alpha)
        step = 1.0 / gap_slope(y, float(r), alpha)
        u, ok1 = first_n_from(r, d - 1, True, y - step, p, q, alpha)
        v, ok2 = first_n_from(r, d + 1, False, y + step, p, q, alpha)
        if not (ok1 and ok2):
            bad[r] = True
            continue
        for n in range(u, v):
            a0, x0 = floor_pow_one(float(n), p, q, alpha)
            a1, x1 = floor_pow_one(float(n + r), p, q, alpha)
            amb = x0 or x1
            if a1 - a0 != d and not amb:
                continue
            j = 1
            prev = a1
            while j < kmax - 1 and not amb:
                nxt, x2 = floor_pow_one(float(n + (j + 1) * r), p, q, alpha)
                if x2:
                    amb = True
                    break
                if nxt - prev != d:
                    break
                prev = nxt
                j += 1
            if amb:
                k = namb[0]
                if k < amb_r.shape[0]:
                    amb_r[k] = r
                    amb_n[k] = n
                    namb[0] = k + 1
                else:
                    namb[1] = 1
                continue
            hist[j - 1] += 1
    return 0


@njit(cache=True, nogil=True)
def scan_starts(n_lo, n_hi, r, kmax, d_lo, d_hi, p, q, alpha,
                hist, ov_n, ov_val, amb_n, namb):
    """Scan starts n_lo <= n < n_hi with step r.

    For each start the first difference D = a(n+r) - a(n) is taken; when
    d_lo <= D <= d_hi the run length J (1 <= J <= kmax-1) of equal
    consecutive differences is recorded in hist[D - d_lo, J - 1].
    Floors are computed blockwise; ambiguous floors missing from the
    override table are reported.
    """
    span = (kmax - 1) * r
    block = max(1 << 16, 8 * span)
    buf = np.empty(block + span + 1, dtype=np.int64)
    nov = ov_n.shape[0]
    n0 = n_lo
    while n0 < n_hi:
        cnt = min(block, n_hi - n0)
        for i in range(cnt + span):
            fl, a = floor_pow_one(float(n0 + i), p, q, alpha)
            if a:
                fl = _override(n0 + i, fl, ov_n, ov_val, nov, amb_n, namb)
            buf[i] = fl
        for i in range(cnt):
            dd0 = buf[i + r] - buf[i]
            if d_lo <= dd0 <= d_hi:
                j = 1
                while j < kmax - 1 and buf[i + (j + 1) * r] - buf[i + j * r] == dd0:
                    j += 1
                hist[dd0 - d_lo, j - 1] += 1
        n0 += cnt
    return 0


@njit(cache=True, nogil=True)
def _override(n, fl, ov_n, ov_val, nov, amb_n, namb):
    if nov > 0:
        i = np.searchsorted(ov_n, n)
        if i < nov and ov_n[i] == n:
            return ov_val[i]
    k = namb[0]
    if k < amb_n.shape[0]:
        amb_n[k] = n
        namb[0] = k + 1
    else:
        namb[1] = 1
    return fl
