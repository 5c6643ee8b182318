"""Self-check suites run by ``pslab verify``.

Each suite returns a SuiteResult; ``failure`` names the first failing
check with its inputs so a red run is easy to reproduce.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .certreal import (
    AlphaContext,
    gap_inverse,
    inverse_second_derivative,
    inverse_third_derivative_ratio,
)
from .counting import kap_count, oracle_pair_table, pair_count, triplet_count
from .equidist import (
    ConvexRegion,
    discrepancy_brute,
    discrepancy_exact,
    etk_bound,
    region_measure,
    region_measure_grid,
)
from .errors import DomainError

SUITES = ("hand", "oracle", "derivatives", "discrepancy", "regions")

# the brute oracle for alpha = 1.2 needs (d/1.2)**5 sequence terms
ORACLE_ALPHA_DMAX = {"1.2": 25, "1.5": None, "1.7": None}


@dataclass
class SuiteResult:
    name: str
    passed: bool
    checks: int = 0
    failure: str | None = None
    info: dict = field(default_factory=dict)

    def as_dict(self):
        return {"suite": self.name, "passed": self.passed, "checks": self.checks,
                "failure": self.failure, **({"info": self.info} if self.info else {})}


def _fail(res, msg):
    if res.failure is None:
        res.failure = msg
    res.passed = False


def suite_hand(**_) -> SuiteResult:
    res = SuiteResult("hand", True)
    ctx = AlphaContext.from_value("1.5")
    checks = [
        ("N(1)", pair_count(ctx, 1).pair_count, 1),
        ("N(2)", pair_count(ctx, 2).pair_count, 0),
        ("N(3)", pair_count(ctx, 3).pair_count, 4),
        ("N_3(3)", kap_count(ctx, 3, 3), 3),
        ("T(3)", triplet_count(ctx, 3), 1),
    ]
    for name, got, want in checks:
        res.checks += 1
        if got != want:
            _fail(res, f"alpha=1.5 {name}: got {got}, expected {want}")
    return res


def suite_oracle(dmax: int = 500, alphas=None, **_) -> SuiteResult:
    res = SuiteResult("oracle", True)
    alphas = list(alphas) if alphas else list(ORACLE_ALPHA_DMAX)
    for a in alphas:
        cap = ORACLE_ALPHA_DMAX.get(str(a))
        top = dmax if cap is None else min(dmax, cap)
        ctx = AlphaContext.from_value(a)
        table = oracle_pair_table(ctx, top)
        res.info[str(a)] = top
        for d in range(1, top + 1):
            res.checks += 1
            got = pair_count(ctx, d).pair_count
            if got != table[d]:
                _fail(res, f"alpha={a} d={d}: engine {got}, oracle {table[d]}")
                break
    return res


def fd_derivatives(ctx: AlphaContext, r: int, d: int, rel_step: float = 1e-3):
    """Central second and third differences of r -> f_r^-1(d) from tight enclosures."""
    h = Fraction(rel_step) * r

    def y(rr):
        return gap_inverse(rr, d, ctx, rel_tol=1e-32).mid_exact

    r = Fraction(r)
    y0, yp, ym = y(r), y(r + h), y(r - h)
    ypp, ymm = y(r + 2 * h), y(r - 2 * h)
    second = (yp - 2 * y0 + ym) / h ** 2
    third = (ypp - 2 * yp + 2 * ym - ymm) / (2 * h ** 3)
    return float(second), float(third)


def suite_derivatives(**_) -> SuiteResult:
    res = SuiteResult("derivatives", True)
    for a in ("1.3", "1.5", "1.7"):
        ctx = AlphaContext.from_value(a)
        for r in (1, 5, 20):
            for d in (10**3, 10**5):
                fd2, fd3 = fd_derivatives(ctx, r, d)
                y2 = inverse_second_derivative(r, d, ctx)
                res.checks += 1
                if abs(y2 / fd2 - 1) > 1e-5:
                    _fail(res, f"alpha={a} r={r} d={d}: y''={y2} vs difference {fd2}")
                try:
                    ratio = inverse_third_derivative_ratio(r, d, ctx)
                except DomainError:
                    continue
                res.checks += 1
                if abs(ratio / (-fd3 / fd2) - 1) > 1e-4:
                    _fail(res, f"alpha={a} r={r} d={d}: -y'''/y''={ratio} vs {-fd3 / fd2}")
    return res


def suite_discrepancy(seed: int = 0, **_) -> SuiteResult:
    res = SuiteResult("discrepancy", True)
    rng = random.Random(seed)
    for trial in range(200):
        n = rng.randint(1, 50)
        pts = [Fraction(rng.randrange(10**6), 10**6) for _ in range(n)]
        ex = discrepancy_exact(pts)
        res.checks += 1
        if ex != discrepancy_brute(pts):
            _fail(res, f"random set {trial} (seed {seed}, n={n}): exact {ex} differs from brute force")
        res.checks += 1
        bound = etk_bound(pts, 10)
        if float(ex) > bound:
            _fail(res, f"random set {trial}: exact {float(ex)} above ETK bound {bound}")
    for N in range(2, 65):
        pts = [Fraction(i, N) for i in range(N)]
        res.checks += 1
        if discrepancy_exact(pts) != Fraction(1, N):
            _fail(res, f"equally spaced N={N}: D != 1/N")
        res.checks += 1
        if float(discrepancy_exact(pts)) > etk_bound(pts, N - 1):
            _fail(res, f"equally spaced N={N}: exact above ETK bound")
    return res


def suite_regions(**_) -> SuiteResult:
    res = SuiteResult("regions", True)
    for k in (2, 3, 5):
        for eps in (0.0, 0.1, 0.5):
            for sign in ("minus", "plus"):
                reg = ConvexRegion(k, eps, sign)
                res.checks += 1
                err = abs(region_measure_grid(reg, 1e-3) - region_measure(reg))
                if err > 1e-3:
                    _fail(res, f"k={k} eps={eps} {sign}: grid differs by {err}")
    return res


_RUNNERS = {
    "hand": suite_hand,
    "oracle": suite_oracle,
    "derivatives": suite_derivatives,
    "discrepancy": suite_discrepancy,
    "regions": suite_regions,
}


def run_suites(names=None, **kw) -> list:
    names = list(names) if names else list(SUITES)
    unknown = [n for n in names if n not in _RUNNERS]
    if unknown:
        raise DomainError(f"unknown suite(s): {', '.join(unknown)}; choose from {', '.join(SUITES)}")
    return [_RUNNERS[n](**kw) for n in names]
