"""Exact-arithmetic laboratory for S_M(alpha) = sum_{m<=M} 1/||m alpha||."""

__version__ = "0.1.0"

from .cf import (  # noqa: E402
    GOLDEN,
    POW2,
    SQRT2_MINUS_1,
    SQRT3_MINUS_1_HALF,
    Convergent,
    PartialQuotients,
    QuadraticSurd,
    RandomDyadic,
    Rational,
    RuleGenerated,
    convergents,
    expand_quadratic,
    expand_rational,
    locate_k,
    quotients,
)
from .errors import (  # noqa: E402
    BudgetExceeded,
    CapExceeded,
    CycleNotFound,
    ExpansionExhausted,
    HorizonExceeded,
    InvalidAlpha,
    MalphaError,
    RationalDegenerate,
)
from .evaluate import (  # noqa: E402
    NormDistEnclosure,
    alpha_enclosure,
    norm_dist_malpha,
    norm_dist_rational,
    residue,
)
from .interval import RationalInterval, ln_interval  # noqa: E402
from .sums import (  # noqa: E402
    SumReport,
    block_profile,
    cesaro_means,
    s_m,
    s_m_beta,
    s_m_weighted,
)
