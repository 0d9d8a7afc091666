"""lcslab: a simulation laboratory for LCS score curves and their fluctuations.

The package covers the asymmetric source model (one sequence over
{0, 1, a}, one binary), the bit-drop construction of the score curve
L^a(k), matching-subsequence combinatorics, and Monte Carlo estimators
for the variance-scaling and slope-event experiments.
"""

from .drop import (
    DropState,
    InsertionMode,
    drop_init,
    drop_step,
    drop_step_forced,
    drop_to,
    simulate_Ln_coupled,
    uniformity_counts,
)
from .engine import (
    ScoreCurve,
    SubstitutionMatrix,
    align_score,
    lcs_bitparallel,
    lcs_length,
    lcs_prefix_curve,
    lcs_row,
)
from .experiments import (
    EVENT_NAMES,
    DistributionCheck,
    EventEstimate,
    ExperimentConfig,
    GammaEstimate,
    InclusionReport,
    RunSummary,
    VarianceRow,
    binary_Ln_samples,
    check_inclusions,
    coupled_Ln_samples,
    delta_default,
    direct_Ln_samples,
    distribution_equality_check,
    estimate_event,
    estimate_gamma,
    exact_E_L10,
    exact_E_Lm,
    exact_Ln_law,
    fit_rate_constant,
    increment_outcomes,
    increment_probability_check,
    run_drop_experiment,
    run_variance_scaling,
    tail_envelope,
    verify_variance_bound_continuous,
    verify_variance_lemma,
)
from .matchings import (
    Block,
    Matching,
    MatchRecord,
    blocks,
    check_single_color,
    classify_matches,
    containment_prob_exact,
    count_ND,
    enumerate_maximal_matchings,
    free_bit_total,
    is_partial_order_minimal,
    minimal_matching,
    nonempty_match_count,
    render_alignment,
    renewal_embed,
)
from .sequences import (
    A,
    ONE,
    ZERO,
    BinarySequence,
    RngStream,
    TriSequence,
    generate_case1,
    strip_a,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
