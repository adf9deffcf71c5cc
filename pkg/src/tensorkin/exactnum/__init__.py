"""Exact constants in Q[√π]: Gamma values, kinematic coefficients and identity checks."""

from .coefficients import (
    CoeffIndex,
    PipelineCoeffs,
    a_closed,
    a_hat_raw,
    alpha_njk,
    b_coeff,
    c_kinematic,
    c_kinematic_raw,
    c_nj_s,
    c_normalizing,
    c_special,
    d_coeff,
    e_coeff,
    pipeline_coeffs,
)
from .gamma import (
    binom,
    gamma,
    gamma_half,
    gamma_ratio,
    gamma_ratio_continued,
    kappa,
    omega,
    rgamma,
    rising,
    rising_ratio_l,
)
from .identities import IdentityResult, SuiteReport, identity_suite
from .ring import ONE, PI, SQRT_PI, ZERO, DomainError, ExactReal

__all__ = [
    "CoeffIndex", "PipelineCoeffs", "a_closed", "a_hat_raw", "alpha_njk", "b_coeff",
    "c_kinematic", "c_kinematic_raw", "c_nj_s", "c_normalizing", "c_special", "d_coeff",
    "e_coeff", "pipeline_coeffs", "binom", "gamma", "gamma_half", "gamma_ratio",
    "gamma_ratio_continued", "kappa", "omega", "rgamma", "rising", "rising_ratio_l",
    "IdentityResult", "SuiteReport", "identity_suite", "ONE", "PI", "SQRT_PI", "ZERO",
    "DomainError", "ExactReal",
]
