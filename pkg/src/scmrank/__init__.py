"""Indirect scoring of incomplete paired comparisons, with axiom audits."""

from .axioms import (
    GeneratorConfig,
    enumerate_macrovertices,
    macrovertex_independence_test,
    scm_audit,
    scm_confront,
    scm_violation_search,
    splitting_balance_check,
)
from .core import (
    CumulativeMatrix,
    Outcome,
    Profile,
    cumulative_matrix,
    degree_summary,
    is_connected,
    is_indivisible,
    outcome_multiset,
    validate_profile,
)
from .errors import ScoringError
from .fixtures import fixture
from .procedures import (
    COWDEN,
    DANIELS,
    ZERMELO_BT,
    Method,
    ScoreVector,
    combine,
    fair_bets_scores,
    grs_scores,
    grs_system,
    implicit_scores,
    ktt_scores,
    least_squares_scores,
    row_sum_scores,
    score_profile,
    taylor_matrix,
    wei_scores,
)

__version__ = "0.1.0"
