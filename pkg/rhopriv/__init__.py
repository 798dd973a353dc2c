"""
    rhopriv
    ~~~~~~~
"""

# flake8: noqa: F401

from .model import (
    DataModel,
    SupportStats,
    validate,
    support_stats,
    lift_randomized_function,
    lift_private_nonprivate,
)
from .mechanisms import (
    Mechanism,
    AddNoiseMechanism,
    is_rho_recoverable,
    build_Wo,
    build_Vo,
    build_Wo_predicate,
    build_Wo_doubleprime,
    build_V1,
    build_V2,
    build_V1_for,
    build_V2_for,
    build_scheme,
    lift_to_W,
    collapse_to_V,
    canonical_relabel,
)
from .privacy import (
    PrivacyReport,
    map_estimate,
    map_estimate_multi,
    privacy_single,
    privacy_multi,
    privacy_multi_addnoise,
    predicate_privacy,
    function_recovery_probability,
    monotone_sequence,
)
from .bounds import (
    BoundsReport,
    rho_privacy_closed,
    predicate_privacy_closed,
    minentropy_decomposition,
    binom_tail_le_half,
    bernoulli_kl,
    gamma_n,
    lambda_n,
    converse_upper,
    achievability_lower_V1,
    closed_V2,
    prop2_bounds,
    asymptotic_summary,
    prior_family_guarantee,
    privacy_curve,
    bounds_report,
)
from .chernoff import (
    ChernoffReport,
    renyi_divergence,
    chernoff_pair,
    chernoff_radius,
    chernoff_report,
    reduce_identical_rows,
    asymptotic_privacy,
    compare_schemes,
)
from .oracle import (
    SearchConfig,
    SimResult,
    search_optimal_mechanism,
    search_optimal_predicate,
    simulate_protocol,
    rational_crosscheck,
)
from .util import adict
from ._const import SCHEME, METHOD
from .g import G


__version__ = '0.1.0'
__license__ = 'MIT'
