"""Adaptive-sample-size trust-region optimization for finite-sum problems.

The package bundles the adaptive driver, the trust-region machinery it is
built from, baseline optimizers (SGD, SVRG, full-batch trust-region
Newton-CG), three classification objective families, dataset loaders, and a
benchmark harness with uniform cost accounting.
"""

__version__ = "0.1.0"

from .accounting import (
    CSV_HEADER,
    CostBudget,
    CostTracker,
    InstrumentedObjective,
    RunLog,
    RunRecord,
    account,
    load_csv,
)
from .adaptive import (
    AstrConfig,
    CurvatureMode,
    InnerResult,
    OuterState,
    outer_update,
    run_astr,
    run_inner,
    schedule_R,
)
from .baselines import (
    FullBatchTrConfig,
    SgdConfig,
    SvrgConfig,
    run_fullbatch_tr,
    run_sgd,
    run_svrg,
)
from .data import (
    Dataset,
    IdxFormatError,
    LibsvmParseError,
    dump_libsvm,
    load_idx,
    parse_libsvm,
    random_split,
    scale_features_maxabs,
    synth_logistic,
)
from .harness import compute_f_star, load_dataset, make_problem, run_experiment
from .problems import (
    FiniteSumObjective,
    LogisticRegressionProblem,
    SigmoidLeastSquaresProblem,
    TwoLayerNetProblem,
    labels_to_01,
    labels_to_pm1,
)
from .trs import (
    NumericsError,
    QuadraticModel,
    TRSolution,
    TRStatus,
    matrix_operator,
    model_eval,
    solve_gradient_step,
    solve_steihaug,
)
from .trstep import TRStepConfig, TRStepResult, trust_region_step

__all__ = [
    "AstrConfig",
    "CSV_HEADER",
    "CostBudget",
    "CostTracker",
    "CurvatureMode",
    "Dataset",
    "FiniteSumObjective",
    "FullBatchTrConfig",
    "IdxFormatError",
    "InnerResult",
    "InstrumentedObjective",
    "LibsvmParseError",
    "LogisticRegressionProblem",
    "NumericsError",
    "OuterState",
    "QuadraticModel",
    "RunLog",
    "RunRecord",
    "SgdConfig",
    "SigmoidLeastSquaresProblem",
    "SvrgConfig",
    "TRSolution",
    "TRStatus",
    "TRStepConfig",
    "TRStepResult",
    "TwoLayerNetProblem",
    "account",
    "compute_f_star",
    "dump_libsvm",
    "labels_to_01",
    "labels_to_pm1",
    "load_csv",
    "load_dataset",
    "load_idx",
    "make_problem",
    "matrix_operator",
    "model_eval",
    "outer_update",
    "parse_libsvm",
    "random_split",
    "run_astr",
    "run_experiment",
    "run_fullbatch_tr",
    "run_inner",
    "run_sgd",
    "run_svrg",
    "scale_features_maxabs",
    "schedule_R",
    "solve_gradient_step",
    "solve_steihaug",
    "synth_logistic",
    "trust_region_step",
]
