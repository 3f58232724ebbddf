"""Numerical operator-perturbation lab: spectral calculus, multilinear
operator integrals, spectral shift estimates and Bernstein fits."""

from ._core import (
    ConvergenceError,
    DomainError,
    OslabError,
    bernstein_fit,
    cm_fit,
    derivative_trace,
    eigh,
    moi_trace,
    operator_derivative,
    phi_samples,
    run_config,
    ssf_cdf,
    ssf_density,
    ssf_moments,
    taylor_remainder_trace,
    truncation_study,
)

__all__ = [
    "ConvergenceError",
    "DomainError",
    "OslabError",
    "bernstein_fit",
    "cm_fit",
    "derivative_trace",
    "eigh",
    "moi_trace",
    "operator_derivative",
    "phi_samples",
    "run_config",
    "ssf_cdf",
    "ssf_density",
    "ssf_moments",
    "taylor_remainder_trace",
    "truncation_study",
]
