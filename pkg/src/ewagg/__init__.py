"""Exponentially weighted aggregation of affine estimators.

Aggregation (EWA / SEWA / GEWA) of families of affine estimators
f_hat = A Y + b for Gaussian regression with heteroscedastic noise, the
Stein risk machinery driving the weights, classical shrinkage baselines
and a Monte Carlo benchmark harness with a CLI (``ewagg-bench``).
"""

__version__ = "0.1.0"

from .aggregate import (
    BlockPartition,
    DegeneratePosteriorError,
    PosteriorWeights,
    Prior,
    build_partition,
    ewa_aggregate,
    ewa_weights,
    gewa_aggregate,
    kl_divergence,
    min_temperature,
    oracle_bound_check,
    sewa_aggregate,
)
from .baselines import (
    MethodResult,
    block_james_stein,
    oracle_select,
    soft_threshold_sure,
    ure_select,
)
from .bench import ExperimentConfig, ExperimentReport, emit_table, run_experiment
from .estimators import (
    AffineEstimator,
    EstimatorFamily,
    block_projection,
    check_condition_C,
    kernel_ridge,
    moving_average,
    pinsker_family,
    pinsker_filter,
    spectral_cutoff,
    symmetrize,
    tikhonov_philipps,
    two_block_shrinkage_family,
    validate_setting1,
    validate_setting2,
)
from .risk import RiskEstimate, adjusted_risk, exact_risk, unbiased_risk
from .signals import (
    CovarianceEstimate,
    NoiseModel,
    Signal,
    dct_forward,
    dct_inverse,
    empirical_norm_sq,
    make_test_signal,
    replication_seed,
    sample_observation,
)

__all__ = [name for name in dir() if not name.startswith("_")]
