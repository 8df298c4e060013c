"""Variable-length computerized mastery testing under the 3-PL model.

Library plus CLI for calibrating and simulating mastery tests that stop
with fixed-length, (truncated) SPRT, or modified Haybittle-Peto rules,
with adaptive item selection, exposure control, and content balancing.
"""

from .calibration import (
    BisectResult,
    BoundaryKind,
    BracketError,
    CalibrationSettings,
    bracket_bisect,
    calibrate_implied_alternative,
    calibrate_modhp_thresholds,
    gaussian_boundary_prob,
    load_calibration_report,
    run_full_calibration,
    siegmund_early_crossing_prob,
    siegmund_terminal_prob,
    solve_thresholds_siegmund,
    write_calibration_report,
)
from .engine import (
    ComparisonReport,
    OperatingCharacteristics,
    RuleKind,
    TestConfig,
    Transcript,
    administer_test,
    apply_rule,
    compare_tests,
    default_theta_grid,
    operating_characteristics,
    rep_stream,
    simulate_batch,
    simulate_records,
    write_report_csv,
)
from .irt import (
    DEFAULT_CLAMP,
    Item,
    ItemPool,
    MleResult,
    MleStatus,
    ResponseRecord,
    fisher_info,
    glr_stat,
    kl_info,
    llr,
    log_likelihood,
    mle,
    natural_param,
    prob_correct,
    psi,
    signed_root,
)
from .pools import (
    PoolDistribution,
    PoolFormatError,
    pool_summary,
    read_pool_csv,
    synthetic_pool,
    write_pool_csv,
)
from .selection import (
    ContentConstraints,
    SelectionRule,
    prune_pool_exposure,
    select_next,
    spiral_category,
)
from .stopping import (
    Decision,
    Hypotheses,
    Thresholds,
    fixed_length_decision,
    min_stage_from_fraction,
    modhp_step,
    sprt_step,
    tsprt_step,
    tsprt_truncation_cutoff,
    wald_thresholds,
)

__version__ = "0.1.0"
