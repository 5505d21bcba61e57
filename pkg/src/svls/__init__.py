"""Low-rank matrix recovery from row-and-column affine measurements."""

from .baselines import (
    GaussianOperator,
    IterativeSolverConfig,
    als_recover,
    apply_operator,
    gaussian_operator,
    rowcol_operator_matrix,
    svp_recover,
)
from .measurements import (
    DesignKind,
    GroundTruth,
    MeasurementDesign,
    MeasurementSet,
    gen_design,
    gen_low_rank,
    measure,
)
from .recovery import (
    RecoveryResult,
    SubspaceBasis,
    core_objective,
    cur_recover,
    estimate_col_space,
    estimate_rank,
    estimate_row_space,
    relative_error,
    solve_core,
    solve_core_bruteforce,
    svls_recover,
    theoretical_bound,
)
from .simulate import (
    ExperimentConfig,
    SummaryRow,
    TrialPoint,
    TrialRecord,
    aggregate,
    run_trial,
    sweep,
    trial_seed,
)

__all__ = [
    "DesignKind",
    "ExperimentConfig",
    "GaussianOperator",
    "GroundTruth",
    "IterativeSolverConfig",
    "MeasurementDesign",
    "MeasurementSet",
    "RecoveryResult",
    "SubspaceBasis",
    "SummaryRow",
    "TrialPoint",
    "TrialRecord",
    "aggregate",
    "als_recover",
    "apply_operator",
    "core_objective",
    "cur_recover",
    "estimate_col_space",
    "estimate_rank",
    "estimate_row_space",
    "gaussian_operator",
    "gen_design",
    "gen_low_rank",
    "measure",
    "relative_error",
    "rowcol_operator_matrix",
    "run_trial",
    "solve_core",
    "solve_core_bruteforce",
    "svls_recover",
    "svp_recover",
    "sweep",
    "theoretical_bound",
    "trial_seed",
]

__version__ = "0.1.0"
