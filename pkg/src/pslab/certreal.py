"""Certified real arithmetic for Piatetski-Shapiro floor problems.

The exponent is always held as an exact rational ``p/q`` (decimal strings
such as ``"1.7"`` become ``17/10``), so ``n**alpha`` is an integer exactly
when ``n`` is a perfect ``q``-th power and irrational otherwise.  Floor and
ordering decisions are made on interval enclosures (``mpmath.iv``) whose
precision doubles until the decision is forced; the irrational cases are
therefore always decided eventually, and the integral cases are settled by
exact integer arithmetic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

import threading
from contextlib import contextmanager

import gmpy2
import mpmath
from mpmath.ctx_iv import MPIntervalContext

from .errors import DomainError, PrecisionExhausted

__all__ = [
    "PrecisionPolicy",
    "AlphaContext",
    "CertifiedValue",
    "GapProbe",
    "parse_alpha",
    "floor_pow",
    "frac_pow",
    "exact_floor_pow",
    "zeta",
    "asymptotic_constant",
    "gap_eval",
    "gap_compare",
    "gap_inverse",
    "gap_probe",
    "inverse_second_derivative",
    "inverse_third_derivative_ratio",
    "rational_power_floor",
    "rational_power_ceil",
]


# mpmath contexts carry a mutable precision, so each thread gets its own pair
_local = threading.local()


def _contexts():
    pair = getattr(_local, "pair", None)
    if pair is None:
        pair = _local.pair = (mpmath.MPContext(), MPIntervalContext())
    return pair


@contextmanager
def _prec(bits):
    """Thread-local (mp, iv) contexts at ``bits`` bits, restored on exit."""
    M, I = _contexts()
    saved = (M.prec, I.prec)
    M.prec = I.prec = int(bits)
    try:
        yield M, I
    finally:
        M.prec, I.prec = saved


# ---------------------------------------------------------------------------
# exponent context
# ---------------------------------------------------------------------------

def parse_alpha(value) -> Fraction:
    """Exact rational exponent from ``"1.5"``, ``"3/2"``, a Fraction or a float.

    Floats go through ``repr`` so that ``1.7`` means 17/10 rather than the
    binary neighbour of 1.7.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"cannot parse alpha {value!r}") from exc
    raise DomainError(f"unsupported alpha type {type(value).__name__}")


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, Rational):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise DomainError(f"non-finite value {x!r}")
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if hasattr(x, "man_exp"):
        return _to_fraction_mpf(x)
    raise DomainError(f"unsupported numeric type {type(x).__name__}")


@dataclass(frozen=True)
class PrecisionPolicy:
    initial_bits: int = 64
    max_bits: int = 4096
    escalation_factor: int = 2

    def __post_init__(self):
        if self.initial_bits < 53 or self.max_bits < self.initial_bits:
            raise DomainError("precision policy needs 53 <= initial_bits <= max_bits")
        if self.escalation_factor < 2:
            raise DomainError("escalation_factor must be >= 2")

    def ladder(self, at_least: int = 0):
        """Working precisions to try, starting at or above ``at_least`` bits."""
        bits = self.initial_bits
        while bits < at_least and bits < self.max_bits:
            bits *= self.escalation_factor
        while bits <= self.max_bits:
            yield bits
            bits *= self.escalation_factor


@dataclass(frozen=True)
class AlphaContext:
    """Exponent 1 < alpha < 2 together with its precision policy."""

    alpha_exact: Fraction
    precision: PrecisionPolicy = field(default_factory=PrecisionPolicy)

    def __post_init__(self):
        a = parse_alpha(self.alpha_exact)
        object.__setattr__(self, "alpha_exact", a)
        if not (1 < a < 2):
            raise DomainError(f"alpha must lie strictly between 1 and 2, got {a}")

    @classmethod
    def from_value(cls, value, *, initial_bits=64, max_bits=4096):
        return cls(parse_alpha(value), PrecisionPolicy(initial_bits, max_bits))

    @property
    def p(self) -> int:
        return self.alpha_exact.numerator

    @property
    def q(self) -> int:
        return self.alpha_exact.denominator

    @property
    def alpha(self) -> float:
        return float(self.alpha_exact)

    @property
    def beta_exact(self) -> Fraction:
        return 1 / (self.alpha_exact - 1)

    @property
    def beta(self) -> float:
        return float(self.beta_exact)

    @property
    def regime_flags(self) -> dict:
        # thresholds compared exactly: 1+1/sqrt2, (sqrt21+4)/5, (sqrt10+2)/3
        a = self.alpha_exact
        return {
            "below_sqrt2_threshold": (a - 1) ** 2 < Fraction(1, 2),
            "in_theorem_range": (5 * a - 4) ** 2 < 21,
            "below_E2_threshold": (3 * a - 2) ** 2 < 10,
        }

    def kernel_ok(self, n_max: int) -> bool:
        """Whether the double-double kernels can handle arguments up to n_max."""
        if n_max >= 2**53 or self.q > 64 or self.p > 128:
            return False
        lg = math.log10(max(n_max, 2) + 1)
        return self.p * lg < 280 and float(self.alpha_exact) * lg < 18.4

    def iv_alpha(self, I):
        """Enclosure of alpha in the interval context ``I``."""
        return I.mpf(self.p) / self.q

    def describe(self) -> dict:
        return {
            "alpha": str(self.alpha_exact),
            "beta": self.beta,
            **self.regime_flags,
        }


# ---------------------------------------------------------------------------
# certified values
# ---------------------------------------------------------------------------

def _ends(x, M):
    a, b = x._mpi_
    return M.make_mpf(a), M.make_mpf(b)


def _to_fraction_mpf(v) -> Fraction:
    m, e = v.man_exp
    return Fraction(int(m)) * (Fraction(2) ** int(e)) if m else Fraction(0)


@dataclass(frozen=True)
class CertifiedValue:
    """Closed enclosure [lo, hi] of a real number.

    Endpoints are binary floats (mpmath mpf) and are stored exactly, so the
    helpers below convert through Fraction whenever they do arithmetic.
    """

    lo: object
    hi: object
    bits: int
    exact: bool = False

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("empty enclosure")

    @property
    def lo_exact(self) -> Fraction:
        return _to_fraction_mpf(self.lo)

    @property
    def hi_exact(self) -> Fraction:
        return _to_fraction_mpf(self.hi)

    @property
    def width(self) -> float:
        return float(self.hi_exact - self.lo_exact)

    @property
    def mid_exact(self) -> Fraction:
        return (self.lo_exact + self.hi_exact) / 2

    @property
    def mid(self) -> float:
        return float(self.mid_exact)

    def __float__(self):
        return self.mid

    def contains(self, x) -> bool:
        x = _as_fraction(x)
        return self.lo_exact <= x <= self.hi_exact

    def floor(self):
        """Common floor of the enclosure, or None if it straddles an integer."""
        a = math.floor(self.lo_exact)
        b = math.floor(self.hi_exact)
        return a if a == b else None

    def frac(self) -> "CertifiedValue":
        """Enclosure of the fractional part; requires a decided floor."""
        f = self.floor()
        if f is None:
            raise ValueError("fractional part undecided: enclosure straddles an integer")
        return CertifiedValue(self.lo - f, self.hi - f, self.bits, self.exact)


def _zero(bits, exact=True):
    M, _ = _contexts()
    z = M.mpf(0)
    return CertifiedValue(z, z, bits, exact=exact)


# ---------------------------------------------------------------------------
# floor / fractional part of n**alpha
# ---------------------------------------------------------------------------

def exact_floor_pow(n: int, ctx: AlphaContext) -> int:
    """floor(n**(p/q)) by integer q-th root of n**p (no floating point at all)."""
    root, _ = gmpy2.iroot(gmpy2.mpz(n) ** ctx.p, ctx.q)
    return int(root)


def _perfect_power_value(n: int, ctx: AlphaContext):
    """a**p when n == a**q, else None."""
    root, exact = gmpy2.iroot(gmpy2.mpz(n), ctx.q)
    if exact:
        return int(root) ** ctx.p
    return None


def _magnitude_bits(n: int, ctx: AlphaContext) -> int:
    return int(ctx.alpha * max(int(n), 1).bit_length()) + 8


def _pow_ends(n: int, ctx: AlphaContext, bits: int):
    with _prec(bits) as (M, I):
        return _ends(I.mpf(n) ** ctx.iv_alpha(I), M)


def floor_pow(n: int, ctx: AlphaContext) -> int:
    """Exactly floor(n**alpha) for a positive integer n."""
    n = int(n)
    if n < 1:
        raise DomainError(f"floor_pow needs n >= 1, got {n}")
    if n == 1:
        return 1
    exact = _perfect_power_value(n, ctx)
    if exact is not None:
        return exact
    bits = ctx.precision.initial_bits
    for bits in ctx.precision.ladder(_magnitude_bits(n, ctx) + 16):
        lo, hi = _pow_ends(n, ctx, bits)
        a = math.floor(_to_fraction_mpf(lo))
        if a == math.floor(_to_fraction_mpf(hi)):
            return a
    raise PrecisionExhausted(f"floor of {n}**{ctx.alpha_exact} undecided at {bits} bits",
                             n=n, bits=bits)


def frac_pow(n: int, ctx: AlphaContext) -> CertifiedValue:
    """Enclosure of the fractional part {n**alpha}, consistent with floor_pow."""
    n = int(n)
    if n < 1:
        raise DomainError(f"frac_pow needs n >= 1, got {n}")
    if n == 1 or _perfect_power_value(n, ctx) is not None:
        return _zero(ctx.precision.initial_bits)
    bits = ctx.precision.initial_bits
    for bits in ctx.precision.ladder(_magnitude_bits(n, ctx) + 16):
        lo, hi = _pow_ends(n, ctx, bits)
        enc = CertifiedValue(lo, hi, bits)
        if enc.floor() is not None:
            # subtracting an integer from a float with this many bits is exact
            with _prec(bits + 64):
                return enc.frac()
    raise PrecisionExhausted(f"fractional part of {n}**{ctx.alpha_exact} undecided",
                             n=n, bits=bits)


def rational_power_floor(x, e) -> int:
    """floor(x**e) for rational x >= 0 and rational e > 0, exactly."""
    x = Fraction(x)
    e = Fraction(e)
    if x < 0 or e <= 0:
        raise DomainError("rational_power_floor needs x >= 0 and e > 0")
    a, b = e.numerator, e.denominator
    # floor((P/Q)**(a/b)) = floor(b-th root of floor(P**a / Q**a))
    root, _ = gmpy2.iroot(gmpy2.mpz(x.numerator ** a // x.denominator ** a), b)
    return int(root)


def rational_power_ceil(x, e) -> int:
    x = Fraction(x)
    e = Fraction(e)
    fl = rational_power_floor(x, e)
    a, b = e.numerator, e.denominator
    if fl ** b * x.denominator ** a == x.numerator ** a:
        return fl
    return fl + 1


# ---------------------------------------------------------------------------
# Riemann zeta on the real axis
# ---------------------------------------------------------------------------

_BERNOULLI = [Fraction(1, 6), Fraction(-1, 30), Fraction(1, 42), Fraction(-1, 30),
              Fraction(5, 66)]
_ZETA_TERMS = 10_000
_ZETA_CORRECTIONS = 4


def _zeta_em(s, n_terms, power, fsum, as_real):
    """Dirichlet sum below N plus the Euler-Maclaurin tail at N.

    Returns (value, bound) where bound is twice the first omitted
    correction; for real s > 1 the remainder is smaller than that term.
    """
    N = n_terms
    head = fsum(power(n, -s) for n in range(1, N))
    tail = [power(N, 1 - s) / (s - 1), power(N, -s) / 2]
    rising = s  # s(s+1)...(s+2k-2)
    bound = None
    for k in range(1, _ZETA_CORRECTIONS + 2):
        b = _BERNOULLI[k - 1]
        term = as_real(b.numerator) / (b.denominator * math.factorial(2 * k))
        term = term * rising * power(N, -s - 2 * k + 1)
        if k <= _ZETA_CORRECTIONS:
            tail.append(term)
        else:
            bound = 2 * abs(term)
        rising = rising * (s + 2 * k - 1) * (s + 2 * k)
    return head + fsum(tail), bound


def zeta(beta, tol: float = 1e-12) -> float:
    """Riemann zeta at a real point beta > 1 with absolute error <= tol.

    Direct sum of 10**4 terms plus four Euler-Maclaurin corrections; the
    first omitted correction bounds the remainder.  Tolerances tighter than
    a float64 evaluation can promise switch to mpmath arithmetic with more
    direct terms as needed.
    """
    b = float(beta)
    if not b > 1:
        raise DomainError(f"zeta needs beta > 1, got {beta}")
    if not tol > 0:
        raise DomainError("tol must be positive")
    value, bound = _zeta_em(b, _ZETA_TERMS, lambda n, e: float(n) ** e, math.fsum, float)
    # each power is correctly rounded to ~1 ulp and fsum adds nothing further
    rounding = 4 * 2.0 ** -52 * value
    if bound + rounding <= tol:
        return value
    dps = max(30, int(-math.log10(tol)) + 12)
    n_terms = _ZETA_TERMS
    with _prec(int(dps * 3.33) + 8) as (M, _):
        s = M.mpf(beta) if not isinstance(beta, Fraction) else M.mpf(beta.numerator) / beta.denominator
        while True:
            value, bound = _zeta_em(s, n_terms, lambda n, e: M.mpf(n) ** e, M.fsum, M.mpf)
            if bound <= tol / 2:
                return float(value)
            n_terms *= 4


def asymptotic_constant(ctx: AlphaContext, k: int = 2) -> float:
    """Limit of N_{alpha,k}(d) / d**(beta-1): beta * alpha**-beta * zeta(beta) / (k-1)."""
    if int(k) != k or k < 2:
        raise DomainError(f"k must be an integer >= 2, got {k}")
    b = ctx.beta
    return b * ctx.alpha ** (-b) * zeta(b, 1e-15) / (k - 1)


# ---------------------------------------------------------------------------
# gap function f_r(x) = (x+r)**alpha - x**alpha and its inverse
# ---------------------------------------------------------------------------

def _iv_exact(I, x):
    """Tight interval for a rational (exact for dyadic values)."""
    x = _as_fraction(x)
    if x.denominator == 1:
        return I.mpf(x.numerator)
    return I.mpf(x.numerator) / x.denominator


def _gap_ends(r, x, ctx: AlphaContext, bits: int):
    with _prec(bits) as (M, I):
        a = ctx.iv_alpha(I)
        X = _iv_exact(I, x)
        R = _iv_exact(I, r)
        if x == 0:
            return _ends(R ** a, M)
        return _ends((X + R) ** a - X ** a, M)


def _bits_for(x, ctx, extra):
    mag = _magnitude_bits(max(1, math.ceil(x)), ctx)
    return max(ctx.precision.initial_bits, mag + extra)


def gap_eval(r, x, ctx: AlphaContext) -> float:
    """f_r(x) = (x+r)**alpha - x**alpha, rounded from a certified enclosure."""
    x = _as_fraction(x)
    r = _as_fraction(r)
    if x < 0:
        raise DomainError("gap_eval needs x >= 0")
    if r <= 0:
        raise DomainError("gap_eval needs r > 0")
    lo, hi = _gap_ends(r, x, ctx, _bits_for(x + r, ctx, 64))
    return float((_to_fraction_mpf(lo) + _to_fraction_mpf(hi)) / 2)


def _sign_against(lo, hi, t: Fraction):
    if _to_fraction_mpf(lo) > t:
        return 1
    if _to_fraction_mpf(hi) < t:
        return -1
    return None


def gap_compare(r: int, n: int, t, ctx: AlphaContext) -> int:
    """Certified sign of f_r(n) - t for integers r >= 1, n >= 0 and rational t."""
    t = _as_fraction(t)
    r, n = int(r), int(n)
    hi_pow = _perfect_power_value(n + r, ctx)
    lo_pow = _perfect_power_value(n, ctx) if n > 0 else 0
    if hi_pow is not None and lo_pow is not None:
        diff = hi_pow - lo_pow
        return (diff > t) - (diff < t)
    # otherwise f_r(n) is irrational and escalation must terminate
    bits = ctx.precision.initial_bits
    for bits in ctx.precision.ladder(_magnitude_bits(n + r, ctx) + 32):
        s = _sign_against(*_gap_ends(r, n, ctx, bits), t)
        if s is not None:
            return s
    raise PrecisionExhausted(f"cannot order f_{r}({n}) against {t}", n=n, r=r, bits=bits)


def _gap_mp(y, r, a):
    return (y + r) ** a - y ** a


def _gap_slope_mp(y, r, a):
    return a * ((y + r) ** (a - 1) - y ** (a - 1))


def gap_inverse(r, t, ctx: AlphaContext, rel_tol: float = 1e-12) -> CertifiedValue:
    """Enclosure of the unique y >= 0 with f_r(y) = t.

    The enclosure has width <= rel_tol * max(1, y).  When its midpoint sits
    within 1e-9 of an integer the tolerance is tightened (by 2**-32 per
    round) until the enclosure excludes that integer, y is shown to equal
    it exactly, or the precision cap is reached.
    """
    r = _as_fraction(r)
    t = _as_fraction(t)
    if r <= 0:
        raise DomainError("gap_inverse needs r > 0")
    if not rel_tol > 0:
        raise DomainError("rel_tol must be positive")
    bits0 = ctx.precision.initial_bits
    lo0, hi0 = _gap_ends(r, 0, ctx, _bits_for(r, ctx, 64))
    # callers pass r**alpha rounded to a double; allow a few ulps of slack
    if t < _to_fraction_mpf(lo0) * (1 - Fraction(4, 2**53)):
        raise DomainError(f"t={float(t)} lies below r**alpha={float(_to_fraction_mpf(lo0))}")
    if t <= _to_fraction_mpf(hi0):
        exact = r.denominator == 1 and _perfect_power_value(int(r), ctx) is not None \
            and t == _perfect_power_value(int(r), ctx)
        return _zero(bits0, exact=exact)

    enc = _inverse_once(r, t, ctx, rel_tol)
    k = round(enc.mid_exact)
    if abs(enc.mid_exact - k) > Fraction(1, 10**9):
        return enc
    if k >= 0 and r.denominator == 1 and t.denominator == 1:
        hp = _perfect_power_value(k + int(r), ctx)
        lp = _perfect_power_value(k, ctx) if k > 0 else 0
        if hp is not None and lp is not None and hp - lp == t:
            M, _ = _contexts()
            v = M.mpf(k)
            return CertifiedValue(v, v, enc.bits, exact=True)
    tol = rel_tol
    while enc.floor() is None or enc.lo_exact == k or enc.hi_exact == k:
        tol *= 2.0 ** -32
        try:
            enc = _inverse_once(r, t, ctx, tol)
        except PrecisionExhausted:
            break
    return enc


def _inverse_once(r: Fraction, t: Fraction, ctx: AlphaContext, rel_tol: float) -> CertifiedValue:
    """Certified bracket of f_r^-1(t) of relative width <= rel_tol.

    The bracket [X - r, X] with X = (t/(r*alpha))**beta comes from the mean
    value theorem.  Newton from the left end (monotone, since f_r is
    concave) proposes a tight bracket which is then certified by interval
    evaluation; if that fails the bracket is bisected with certified signs.
    """
    x_est = (float(t) / (float(r) * ctx.alpha)) ** ctx.beta
    lg = math.log2(max(x_est, 2.0))
    need = int(lg) + int(-math.log2(rel_tol)) + 48
    bits = ctx.precision.initial_bits
    for bits in ctx.precision.ladder(need):
        with _prec(bits) as (M, I):
            a = M.mpf(ctx.p) / ctx.q
            R = M.mpf(r.numerator) / r.denominator
            T = M.mpf(t.numerator) / t.denominator
            X = (T / (R * a)) ** (1 / (a - 1))
            y = max(M.zero, X - R)
            eps = M.mpf(2) ** (-(bits - 8))
            for _ in range(200):
                step = (_gap_mp(y, R, a) - T) / _gap_slope_mp(y, R, a)
                y_new = max(M.zero, y - step)
                done = abs(y_new - y) <= eps * max(1, y)
                y = y_new
                if done:
                    break
            half = M.mpf(rel_tol) * max(1, y) / 4
            lo = max(M.zero, y - half)
            hi = y + half
        lo_f, hi_f = _to_fraction_mpf(lo), _to_fraction_mpf(hi)
        if _certify_bracket(r, t, lo_f, hi_f, ctx, bits):
            return CertifiedValue(lo, hi, bits)
    # Newton polish never certified: fall back to certified bisection
    return _bisect(r, t, ctx, rel_tol, x_est)


def _below(r, t, y, ctx, bits):
    """True/False when f_r(y) < t / > t is certified, None if undecided."""
    if y == 0:
        s = _sign_against(*_gap_ends(r, 0, ctx, bits), t)
    else:
        s = _sign_against(*_gap_ends(r, y, ctx, bits), t)
    return None if s is None else s < 0


def _certify_bracket(r, t, lo, hi, ctx, bits):
    return (lo == 0 or _below(r, t, lo, ctx, bits) is True) and \
        _below(r, t, hi, ctx, bits) is False


def _bisect(r, t, ctx, rel_tol, x_est):
    lo = max(Fraction(0), Fraction(x_est) * (1 - Fraction(1, 2**40)) - r)
    hi = Fraction(x_est) * (1 + Fraction(1, 2**40)) + 1
    bits = ctx.precision.max_bits
    if not _certify_bracket(r, t, lo, hi, ctx, bits):
        raise PrecisionExhausted(f"no certified bracket for f_{r}^-1({t})", r=r, bits=bits)
    target = Fraction(rel_tol) * max(1, lo)
    while hi - lo > target:
        mid = (lo + hi) / 2
        # round the midpoint to a dyadic so interval inputs stay exact
        mid = Fraction(round(mid * 2**80), 2**80)
        b = _below(r, t, mid, ctx, bits)
        if b is None:
            raise PrecisionExhausted(f"bisection stalled for f_{r}^-1({t})", r=r, bits=bits)
        if b:
            lo = mid
        else:
            hi = mid
    M, _ = _contexts()
    with _prec(bits + 64) as (M, _):
        lo_m = M.mpf(lo.numerator) / lo.denominator
        hi_m = M.mpf(hi.numerator) / hi.denominator
    return CertifiedValue(lo_m, hi_m, bits)


@dataclass(frozen=True)
class GapProbe:
    r: object
    d: int
    y: CertifiedValue
    y2: float
    y3_ratio: object  # float, or None when r > d**(1/alpha)/2


def _check_r_range(r, d, ctx, half):
    r = _as_fraction(r)
    if r <= 0 or d < 1:
        raise DomainError("need r > 0 and d >= 1")
    scale = 2 if half else 1
    lo, _ = _gap_ends(scale * r, 0, ctx, 128)
    # a little slack so float step sizes around the boundary are accepted
    if _to_fraction_mpf(lo) > d * (1 + Fraction(1, 10**12)):
        bound = "d**(1/alpha)/2" if half else "d**(1/alpha)"
        raise DomainError(f"r={float(r)} exceeds {bound} for d={d}")
    return r


def _inverse_parts(r, d, ctx, M):
    enc = gap_inverse(r, d, ctx)
    ym = enc.mid_exact
    if ym == 0:
        raise DomainError("f_r^-1(d) = 0; the derivative formulas are singular there")
    y = M.mpf(ym.numerator) / ym.denominator
    a = M.mpf(ctx.p) / ctx.q
    R = M.mpf(r.numerator) / r.denominator
    u = M.log1p(R / y)
    # (y+r)**(a-1) - y**(a-1) without cancellation
    gap1 = y ** (a - 1) * M.expm1((a - 1) * u)
    return y, R, a, u, gap1


def inverse_second_derivative(r, d: int, ctx: AlphaContext) -> float:
    """Second derivative in r of y(r) = f_r^{-1}(d), closed form.

    y'' = d(a-1) / [((y+r)^(a-1) - y^(a-1))^3 y^(2-a) (y+r)^(2-a)]
    """
    r = _check_r_range(r, d, ctx, half=False)
    with _prec(160) as (M, _):
        y, R, a, _, gap1 = _inverse_parts(r, d, ctx, M)
        return float(d * (a - 1) / (gap1 ** 3 * y ** (2 - a) * (y + R) ** (2 - a)))


def inverse_third_derivative_ratio(r, d: int, ctx: AlphaContext) -> float:
    """-y'''/y'' for y(r) = f_r^{-1}(d), valid for r <= d**(1/alpha)/2."""
    r = _check_r_range(r, d, ctx, half=True)
    with _prec(160) as (M, _):
        y, R, a, u, gap1 = _inverse_parts(r, d, ctx, M)
        yr = y + R
        gap2 = y ** (2 * a - 1) * M.expm1((2 * a - 1) * u)
        num = (2 * a - 1) * R * y ** (a - 1) * yr ** (a - 1) - (2 - a) * gap2
        return float(num / (gap1 ** 2 * y * yr))


def gap_probe(r, d: int, ctx: AlphaContext) -> GapProbe:
    y = gap_inverse(r, d, ctx)
    y2 = inverse_second_derivative(r, d, ctx)
    try:
        y3 = inverse_third_derivative_ratio(r, d, ctx)
    except DomainError:
        y3 = None
    return GapProbe(r=r, d=d, y=y, y2=y2, y3_ratio=y3)
