"""Threshold stopping rules for the secretary problem under non-uniform permutation laws."""

from .closed_forms import (
    EXACT_FAMILIES,
    CriticalWindow,
    FixedQ,
    Intermediate,
    LimitResult,
    Uniform,
    asymptotic_optimum,
    classical_exact,
    critical_window_fraction,
    exact,
    fixed_q_optimum,
    g_fixed_q,
    h_critical,
    h_intermediate,
    h_reverse_sukhatme,
    h_sukhatme,
    intermediate_regime,
    limit_curve,
    luce_inv_down_exact,
    mallows_down_exact,
    mallows_up_exact,
    optimize_threshold,
    success_curve,
    sukhatme_optimal_fraction,
    tail_sum,
)
from .engine import (
    MonteCarloEstimate,
    bruss_odds_threshold,
    exact_success_by_enumeration,
    exact_success_curve,
    independence_defect,
    monte_carlo_success,
    odds_suffix_sums,
    record_joint_law,
    record_marginals,
    run_threshold_strategy,
    success_mask,
)
from .errors import (
    BadParameter,
    BadProbability,
    BadThreshold,
    DomainError,
    DuplicateEntries,
    InvalidPermutation,
    StopsmithError,
    TooLarge,
)
from .models import (
    ModelSpec,
    WeightVector,
    empirical_tv,
    enumerate_support,
    exponential_reduction_sample,
    log_mallows_normalizer,
    luce_inv_pmf,
    luce_inv_sample,
    luce_pmf,
    luce_sample,
    mallows_normalizer,
    mallows_pmf,
    mallows_sample,
    p_shifted_pmf,
    p_shifted_sample,
    sukhatme_gap_sample,
)
from .perm import (
    LehmerCode,
    Permutation,
    RankDirection,
    complement,
    inverse,
    inversion_count,
    lehmer_decode,
    lehmer_encode,
    record_indicators,
    reduce_sequence,
    reverse,
)

__version__ = "0.1.0"
