"""pslab: exact counts and equidistribution checks for Piatetski-Shapiro sequences.

The sequence is floor(n**alpha) with 1 < alpha < 2.  The library counts
pairs and k-term progressions with common difference d, evaluates the
limit constant beta * alpha**(-beta) * zeta(beta) / (k - 1), and offers
discrepancy and exponential-sum tools for the pairs of fractional parts
that drive the counts.
"""
__version__ = "0.1.0"

from .certreal import (
    AlphaContext,
    CertifiedValue,
    PrecisionPolicy,
    asymptotic_constant,
    floor_pow,
    frac_pow,
    gap_inverse,
    inverse_second_derivative,
    inverse_third_derivative_ratio,
    zeta,
)
from .counting import (
    CountRecord,
    ErrorTermConfig,
    SweepReport,
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
)
from .equidist import (
    ConvexRegion,
    WindowSpec,
    discrepancy_exact,
    discrepancy_report,
    etk_bound,
    region_measure,
    short_interval_count,
    weyl_sum,
)
from .errors import (
    DegenerateWindow,
    DomainError,
    EmptyInput,
    PrecisionExhausted,
    PSLabError,
    ResourceLimit,
)

__all__ = [name for name in dir() if not name.startswith("_")]
