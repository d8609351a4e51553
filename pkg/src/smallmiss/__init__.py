"""Exact small-sample moments of ML-like and posterior-draw imputation estimators
for a univariate normal sample with values missing completely at random."""

from .estimators import (
    PRESETS,
    TABLE_PRESETS,
    EstimatorConfig,
    Family,
    InadmissibleConfigError,
    MomentSummary,
    MomentTriple,
    ObservedSample,
    ParamEstimate,
    SampleSpec,
    draw_pd,
    estimate_mlike,
    generate_observed,
    observed_estimate,
    observed_moments,
)
from .exact_moments import INFINITE, MIMomentRequest, inf_moments, mi_moments, moments_for_d, si_moments
from .imputation import CompletedSample, DegenerateSampleError, MIResult, impute_once, run_mi, si_decomposition, si_estimate
from .montecarlo import MomentCheck, VerifyReport, verify
from .quadrature import QuadratureConvergenceError, QuadratureSpec, numeric_expectation
from .randcore import DomainError, RngStream, gamma_ratio, log_gamma, sample_chi_square, sample_normal
from .se_estimation import (
    SEEstimate,
    SEMethod,
    rubin_variance_bias,
    se_mi_ml_mu,
    se_mi_pd_mu,
    se_observed_mu,
    wang_robins_se,
)

__version__ = "0.1.0"
