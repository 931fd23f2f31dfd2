"""Copula-coupled monotone-flow sensitivity analysis for causal effects.

The model couples a pair of learned strictly-increasing transforms (one
per observed variable, the outcome's conditioned on the treatment)
through a bivariate Gaussian noise base with correlation ``rho``.  The
correlation encodes the strength of non-causal backdoor association;
fitting the transforms at each ``rho`` on a grid and intervening on the
treatment yields the average causal effect as a function of the assumed
confounding, its zero crossing, and empirical effect bounds.
"""

from .causal import (
    DEFAULT_RHO_GRID,
    CopulaFlowModel,
    RhoCurve,
    RhoCurvePoint,
    estimate_ace,
    expected_potential_outcome,
    rho_value_closed_form,
    rho_value_from_curve,
    sweep_rho_curve,
)
from .copula import (
    CopulaParam,
    NoisePair,
    RankStats,
    kendall_from_rho,
    kendall_tau,
    log_density,
    rank_stats,
    rho_from_kendall,
    rho_from_spearman,
    sample_pair,
    spearman_from_rho,
    spearman_rho,
)
from .data import CONTINUOUS, Dataset, VarSchema, read_csv, write_csv
from .dequant import DequantSpec, decode, encode
from .dgp import (
    BinaryDgpParams,
    BinaryObsStats,
    CategoricalDgpParams,
    LinearScmParams,
    af_bounds,
    benchmark_linear_scms,
    binary_true_ace,
    categorical_af_bounds,
    categorical_exact_bounds,
    categorical_true_ace,
    dgp_from_dict,
    dgp_to_dict,
    empirical_obs_stats,
    exact_obs_stats,
    linear_ace_oracle,
    random_binary_dgp,
    random_categorical_dgp,
    sample_binary_dgp,
    sample_categorical_dgp,
    sample_dgp,
    sample_linear_scm,
    true_ace,
)
from .errors import (
    CopsensError,
    DegenerateCopulaError,
    DivergedFitError,
    InvalidInputError,
    InversionError,
    SchemaError,
    SweepError,
)
from .training import FitReport, TrainConfig, evaluate_nll, fit, joint_log_density
from .transforms import (
    FlowHyper,
    FlowParams,
    TransformEval,
    forward_a,
    forward_y,
    init_params,
    inverse_a,
    inverse_y,
    param_gradient,
    params_from_json,
    params_to_json,
)

__version__ = "0.1.0"
