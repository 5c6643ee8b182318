"""Equidistribution tools: discrepancy, exponential sums and short windows.

The short windows are n in [M, N) with M = ceil(((d+c1)/(r alpha))**beta)
and N = ceil(((d+c2)/(r alpha))**beta); on them the pairs
({n**alpha}, {r alpha n**(alpha-1)}) become equidistributed in the unit
square as d grows.  Fractional parts come from the double-double kernels
together with an error radius, so set membership can be reported as an
interval [count_min, count_max] instead of a guess.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _dd
from .certreal import (
    AlphaContext,
    rational_power_ceil,
    _as_fraction,
    _ends,
    _prec,
    _to_fraction_mpf,
)
from .errors import DegenerateWindow, DomainError, EmptyInput, ResourceLimit

__all__ = [
    "WindowSpec",
    "ConvexRegion",
    "DiscrepancyReport",
    "ShortIntervalCount",
    "discrepancy_exact",
    "discrepancy_brute",
    "etk_bound",
    "discrepancy_report",
    "weyl_sum",
    "window_fractions",
    "vdc_bound",
    "sargos_bound",
    "power_sum",
    "derivative_test_constants",
    "region_measure",
    "region_measure_grid",
    "unit_box",
    "short_interval_count",
    "predicted_density",
]

_CHUNK = 1 << 20
_SLOW_CAP = 20_000


# ---------------------------------------------------------------------------
# windows and regions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WindowSpec:
    r: int
    d: int
    c1: Fraction
    c2: Fraction
    M: int
    N: int

    @classmethod
    def build(cls, ctx: AlphaContext, r: int, d: int, c1=0, c2=1) -> "WindowSpec":
        """Window with certified integer endpoints.

        The hypothesis c2 - c1 in {1, 2, ...} is enforced exactly, so
        ``c1=0.1, c2=1.1`` is rejected (binary 1.1 - 0.1 is not 1); pass
        decimal strings or Fractions for such offsets.
        """
        if int(r) != r or r < 1:
            raise DomainError(f"r must be a positive integer, got {r}")
        if int(d) != d or d < 1:
            raise DomainError(f"d must be a positive integer, got {d}")
        c1, c2 = _as_fraction(c1), _as_fraction(c2)
        gap = c2 - c1
        if gap.denominator != 1 or gap < 1:
            raise DomainError(f"c2 - c1 must be a positive integer, got {gap}")
        if d + c1 <= 0:
            raise DomainError("d + c1 must be positive")
        scale = 1 / (int(r) * ctx.alpha_exact)
        M = rational_power_ceil((d + c1) * scale, ctx.beta_exact)
        N = rational_power_ceil((d + c2) * scale, ctx.beta_exact)
        return cls(int(r), int(d), c1, c2, M, N)

    @property
    def length(self) -> int:
        return self.N - self.M


@dataclass(frozen=True)
class ConvexRegion:
    """C_k^-(eps) = {0 <= y0 < 1-eps, 0 <= y0 + (k-1) y1 < 1-eps} and
    C_k^+(eps) = {-eps <= y0 < 1, -eps <= y0 + (k-1) y1 < 1}."""

    k: int
    epsilon: float
    sign: str = "minus"

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 2:
            raise DomainError(f"k must be an integer >= 2, got {self.k}")
        if not (0 <= self.epsilon < 1):
            raise DomainError(f"epsilon must lie in [0, 1), got {self.epsilon}")
        if self.sign not in ("minus", "plus"):
            raise DomainError(f"sign must be 'minus' or 'plus', got {self.sign!r}")

    @property
    def bounds(self):
        """(lo, hi) shared by y0 and y0 + (k-1) y1."""
        e = self.epsilon
        return (0.0, 1.0 - e) if self.sign == "minus" else (-e, 1.0)

    def contains(self, y0, y1):
        lo, hi = self.bounds
        y0 = np.asarray(y0, dtype=float)
        s = y0 + (self.k - 1) * np.asarray(y1, dtype=float)
        return (lo <= y0) & (y0 < hi) & (lo <= s) & (s < hi)

    def multiplicity(self, y0, y1):
        """Number of integer shifts (s0, s1) with (y0+s0, y1+s1) in the region.

        This is the count of the region's lattice translates that cover a
        point of the torus, so its average over the unit square is the
        region's area.
        """
        lo, hi = self.bounds
        k1 = self.k - 1
        y0 = np.asarray(y0, dtype=float)
        y1 = np.asarray(y1, dtype=float)
        total = np.zeros(np.broadcast(y0, y1).shape, dtype=np.int64)
        for s0 in range(math.floor(lo) - 1, math.ceil(hi) + 1):
            z0 = y0 + s0
            inside = (lo <= z0) & (z0 < hi)
            # s1 in [(lo - z0)/k1 - y1, (hi - z0)/k1 - y1)
            a = (lo - z0) / k1 - y1
            b = (hi - z0) / k1 - y1
            cnt = np.ceil(b) - np.ceil(a)
            total += np.where(inside, cnt, 0).astype(np.int64)
        return total


def region_measure(region: ConvexRegion) -> float:
    """Area (1 -/+ eps)**2 / (k-1)."""
    e = region.epsilon
    side = 1 - e if region.sign == "minus" else 1 + e
    return side * side / (region.k - 1)


def region_measure_grid(region: ConvexRegion, step: float = 1e-3) -> float:
    """Midpoint-rule area of the region over its bounding box."""
    if not step > 0:
        raise DomainError("step must be positive")
    lo, hi = region.bounds
    k1 = region.k - 1
    n0 = int(round((hi - lo) / step))
    y0 = lo + (np.arange(n0) + 0.5) * step
    y1_lo, y1_hi = (lo - hi) / k1, (hi - lo) / k1
    n1 = int(math.ceil((y1_hi - y1_lo) / step))
    y1 = y1_lo + (np.arange(n1) + 0.5) * step
    inside = 0
    for row in np.array_split(y0, max(1, n0 // 256)):
        inside += int(np.count_nonzero(region.contains(row[:, None], y1[None, :])))
    return inside * step * step


def unit_box(x_lo, x_hi, y_lo, y_hi):
    """Predicate for the box [x_lo, x_hi) x [y_lo, y_hi)."""
    def pred(x, y):
        return (x_lo <= x) & (x < x_hi) & (y_lo <= y) & (y < y_hi)
    pred.box = (x_lo, x_hi, y_lo, y_hi)
    return pred


# ---------------------------------------------------------------------------
# discrepancy
# ---------------------------------------------------------------------------

def _fractional(points):
    pts = list(points)
    if not pts:
        raise EmptyInput("discrepancy of an empty point set")
    if all(isinstance(p, (Fraction, int)) for p in pts):
        return [Fraction(p) - math.floor(p) for p in pts], True
    arr = np.asarray(pts, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("points must be finite")
    fr = arr - np.floor(arr)
    fr[fr >= 1.0] = 0.0
    return fr, False


def discrepancy_exact(points) -> float:
    """Extreme discrepancy over half-open subintervals of [0, 1).

    With sorted fractional parts x_(1) <= ... <= x_(N):
    D = max_i (i/N - x_(i)) + max_i (x_(i) - (i-1)/N).
    Fractions in, exact Fraction out; otherwise float arithmetic.
    """
    fr, exact = _fractional(points)
    n = len(fr)
    if exact:
        xs = sorted(fr)
        a = max(Fraction(i + 1, n) - x for i, x in enumerate(xs))
        b = max(x - Fraction(i, n) for i, x in enumerate(xs))
        return a + b
    xs = np.sort(fr)
    i = np.arange(n, dtype=float)
    a = np.max((i + 1) / n - xs)
    b = np.max(xs - i / n)
    return float(a + b)


def discrepancy_brute(points) -> Fraction:
    """Sup over [a, b) subset [0, 1) by scanning endpoint pairs in exact arithmetic.

    Overcounts are approached by [x_i, x_j + 0), undercounts by
    [a + 0, b) with a, b among the points and {0, 1}.  Quadratic in the
    number of distinct endpoints times N; meant for small sets.
    """
    pts = list(points)
    if not pts:
        raise EmptyInput("discrepancy of an empty point set")
    xs = sorted((Fraction(p) if isinstance(p, (int, Fraction)) else Fraction(float(p))) % 1
                for p in pts)
    n = len(xs)
    ends = sorted(set(xs) | {Fraction(0), Fraction(1)})
    best = Fraction(0)
    for i, a in enumerate(ends):
        for b in ends[i:]:
            closed = sum(1 for x in xs if a <= x <= b)
            opened = sum(1 for x in xs if a < x < b)
            best = max(best, Fraction(closed, n) - (b - a), (b - a) - Fraction(opened, n))
    return best


def _harmonics(fr, H):
    fr = np.asarray([float(x) for x in fr] if isinstance(fr, list) else fr, dtype=float)
    n = fr.size
    out = {}
    for h in range(1, H + 1):
        # h*x mod 1 before the exponential keeps the phase small
        ph = np.mod(h * fr, 1.0)
        out[h] = abs(np.exp(2j * np.pi * ph).sum()) / n
    return out


def etk_bound(points, H: int) -> float:
    """3 * (1/(H+1) + sum_{h<=H} |mean e(h x_n)| / h)."""
    if int(H) != H or H < 1:
        raise DomainError(f"H must be a positive integer, got {H}")
    fr, _ = _fractional(points)
    harm = _harmonics(fr, int(H))
    return 3.0 * (1.0 / (H + 1) + math.fsum(v / h for h, v in harm.items()))


@dataclass
class DiscrepancyReport:
    n_points: int
    exact_discrepancy: float
    etk_bound: float
    harmonics: dict = field(default_factory=dict)
    H: int = 0

    @property
    def ratio(self) -> float:
        """exact / bound, reported so the constant 3 is never hidden."""
        return self.exact_discrepancy / self.etk_bound


def discrepancy_report(points, H: int = 20) -> DiscrepancyReport:
    fr, _ = _fractional(points)
    exact = float(discrepancy_exact(fr if not isinstance(fr, np.ndarray) else fr.tolist()))
    harm = _harmonics(fr, int(H))
    bound = 3.0 * (1.0 / (H + 1) + math.fsum(v / h for h, v in harm.items()))
    return DiscrepancyReport(n_points=len(fr), exact_discrepancy=exact, etk_bound=bound,
                             harmonics=harm, H=int(H))


# ---------------------------------------------------------------------------
# fractional parts on windows
# ---------------------------------------------------------------------------

def _slow_pairs(ctx, n0, count, r):
    fx = np.empty(count)
    fy = np.empty(count)
    rad = np.empty(count)
    for i in range(count):
        n = n0 + i
        bits = 64 + int(ctx.alpha * n.bit_length()) + 16
        with _prec(bits) as (M, I):
            a = I.mpf(ctx.p) / ctx.q
            v = I.mpf(n) ** a
            w = r * a * v / n
            vals = []
            for x in (v, w):
                lo, hi = (_to_fraction_mpf(t) for t in _ends(x, M))
                fl = math.floor(lo)
                vals.append((float(lo - fl), float(hi - lo) + 2.0 ** -52))
        (fx[i], rx), (fy[i], ry) = vals
        rad[i] = max(rx, ry)
    return fx, fy, rad


def window_fractions(ctx: AlphaContext, w: WindowSpec, start: int = 0, count: int | None = None):
    """({n**alpha}, {r alpha n**(alpha-1)}, error radius) for n = M+start, ..."""
    total = w.length
    count = total - start if count is None else min(count, total - start)
    n0 = w.M + start
    if ctx.kernel_ok(n0 + count):
        fx = np.empty(count)
        fy = np.empty(count)
        rad = np.empty(count)
        _dd.frac_pairs(n0, count, w.r, ctx.p, ctx.q, ctx.alpha, fx, fy, rad)
        return fx, fy, rad
    if count > _SLOW_CAP:
        raise ResourceLimit(f"window of {count} terms needs the slow exact path (cap {_SLOW_CAP})")
    return _slow_pairs(ctx, n0, count, w.r)


def _chunks(w: WindowSpec):
    for s in range(0, w.length, _CHUNK):
        yield s, min(_CHUNK, w.length - s)


def weyl_sum(ctx: AlphaContext, w: WindowSpec, h1: int, h2: int) -> float:
    """|(1/(N-M)) sum_{M<=n<N} e(h1 n**alpha + h2 r alpha n**(alpha-1))|.

    Integer multiples of the integer parts drop out, so the phase is
    h1 {n**alpha} + h2 {r alpha n**(alpha-1)} reduced mod 1.  Chunks are
    summed in index order for a reproducible result.
    """
    if w.N <= w.M:
        raise DegenerateWindow(f"empty window M={w.M}, N={w.N}")
    h1, h2 = int(h1), int(h2)
    if h1 == 0 and h2 == 0:
        return 1.0
    acc = 0j
    for s, c in _chunks(w):
        fx, fy, _ = window_fractions(ctx, w, s, c)
        ph = np.mod(h1 * fx + h2 * fy, 1.0)
        acc += complex(np.exp(2j * np.pi * ph).sum())
    return min(1.0, abs(acc) / w.length)


# ---------------------------------------------------------------------------
# derivative tests
# ---------------------------------------------------------------------------

def vdc_bound(interval_len: float, lambda2: float, c: float = 1.0) -> float:
    """Second-derivative test shape |I| lambda2**(1/2) + lambda2**(-1/2).

    ``c`` is the hypothesis ratio lambda2 <= |f''| <= c lambda2; it only
    enters the implied constant, so it is validated but not applied.
    """
    if not interval_len >= 1:
        raise DomainError("interval length must be >= 1")
    if not lambda2 > 0:
        raise DomainError("lambda2 must be positive")
    if not c >= 1:
        raise DomainError("c must be >= 1")
    return interval_len * math.sqrt(lambda2) + 1 / math.sqrt(lambda2)


def sargos_bound(interval_len: float, lambda3: float, c: float = 1.0) -> float:
    """Third-derivative test shape |I| lambda3**(1/6) + lambda3**(-1/3); ``c`` as in vdc_bound."""
    if not interval_len >= 1:
        raise DomainError("interval length must be >= 1")
    if not lambda3 > 0:
        raise DomainError("lambda3 must be positive")
    if not c >= 1:
        raise DomainError("c must be >= 1")
    return interval_len * lambda3 ** (1 / 6) + lambda3 ** (-1 / 3)


def power_sum(ctx: AlphaContext, n_lo: int, n_hi: int) -> float:
    """|sum_{n_lo <= n < n_hi} e(n**alpha)| (unnormalized)."""
    if n_hi <= n_lo:
        raise DegenerateWindow("empty range")
    acc = 0j
    for s in range(n_lo, n_hi, _CHUNK):
        c = min(_CHUNK, n_hi - s)
        w = WindowSpec(1, 1, Fraction(0), Fraction(1), s, s + c)
        fx, _, _ = window_fractions(ctx, w)
        acc += complex(np.exp(2j * np.pi * fx).sum())
    return abs(acc)


def derivative_test_constants(ctx: AlphaContext, ranges) -> list:
    """Measured |sum e(n**alpha)| over each [a, b) against both test shapes.

    On [a, b) the second derivative alpha(alpha-1) n**(alpha-2) lies
    between its values at b and a; lambda2 is the smaller one, likewise
    for the third derivative.  Each entry reports the ratio measured/shape.
    """
    a_ = ctx.alpha
    out = []
    for lo, hi in ranges:
        s = power_sum(ctx, lo, hi)
        lam2 = a_ * (a_ - 1) * hi ** (a_ - 2)
        lam3 = a_ * (a_ - 1) * (2 - a_) * hi ** (a_ - 3)
        out.append({
            "range": (lo, hi),
            "sum": s,
            "K2": s / vdc_bound(hi - lo, lam2),
            "K3": s / sargos_bound(hi - lo, lam3),
        })
    return out


# ---------------------------------------------------------------------------
# short-interval counts
# ---------------------------------------------------------------------------

@dataclass
class ShortIntervalCount:
    count_min: int
    count_max: int
    n_terms: int
    d: int
    beta: float

    @property
    def count(self) -> float:
        """Midpoint of the certified count interval."""
        return (self.count_min + self.count_max) / 2

    @property
    def density(self) -> float:
        return self.count / float(self.d) ** (self.beta - 1)


def _membership(cset, x, y):
    if isinstance(cset, ConvexRegion):
        return cset.multiplicity(x, y)
    return np.asarray(cset(x, y)).astype(np.int64)


def short_interval_count(ctx: AlphaContext, w: WindowSpec, cset) -> ShortIntervalCount:
    """Count n in [M, N) with the pair of fractional parts in ``cset``.

    ``cset`` is a vectorized predicate on [0, 1)**2 or a ConvexRegion (then
    each point counts with its torus multiplicity).  Each point is tested
    at the corners of its error box; disagreeing corners widen the result
    to [count_min, count_max].
    """
    if w.N <= w.M:
        raise DegenerateWindow(f"empty window M={w.M}, N={w.N}")
    lo_total = 0
    hi_total = 0
    for s, c in _chunks(w):
        fx, fy, rad = window_fractions(ctx, w, s, c)
        vals = []
        for sx in (-1, 1):
            for sy in (-1, 1):
                x = fx + sx * rad
                y = fy + sy * rad
                # a corner outside [0, 1) stands for the wrapped value
                x = np.where(x < 0, x + 1, np.where(x >= 1, x - 1, x))
                y = np.where(y < 0, y + 1, np.where(y >= 1, y - 1, y))
                vals.append(_membership(cset, x, y))
        stack = np.stack(vals + [_membership(cset, fx, fy)])
        lo_total += int(stack.min(axis=0).sum())
        hi_total += int(stack.max(axis=0).sum())
    return ShortIntervalCount(count_min=lo_total, count_max=hi_total, n_terms=w.length,
                              d=w.d, beta=ctx.beta)


def predicted_density(ctx: AlphaContext, w: WindowSpec, measure: float) -> float:
    """beta (c2 - c1) mu / (r alpha)**beta."""
    return ctx.beta * float(w.c2 - w.c1) * measure / (w.r * ctx.alpha) ** ctx.beta
