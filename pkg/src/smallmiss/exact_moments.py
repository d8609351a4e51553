"""Exact moments of single-, multiple- and infinite-imputation estimators.

Variances are built from the distributional representations of the SI
estimators. With ``k = nu_obs + c_M`` and ``G = U_imp + (n_obs/n) W`` (ML
imputation), or ``Q ~ chi2(n_mis)`` over ``U_PD`` (PD imputation)::

    sigma2_SI,M  = sigma^2 U_obs / (n-1) * (1 + G / k)
    sigma2_SI,PD = sigma^2 U_obs / (n-1) * (1 + Q / U_PD)

so every moment of sigma2 is a product of chi-square moments. The one
expectation without a closed form, E sqrt(1 + G/k), goes through
:func:`smallmiss.quadrature.numeric_expectation`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .estimators import EstimatorConfig, MomentSummary, MomentTriple, SampleSpec, observed_moments
from .quadrature import QuadratureSpec, numeric_expectation
from .randcore import log_gamma, mean_sqrt_chi2

INFINITE = math.inf


@dataclass(frozen=True)
class MIMomentRequest:
    config: EstimatorConfig
    spec: SampleSpec
    D: float = 5  # int >= 1, or INFINITE

    def __post_init__(self) -> None:
        if not (self.D == INFINITE or (float(self.D).is_integer() and self.D >= 1)):
            raise ValueError(f"D must be a positive integer or INFINITE, got {self.D}")


@dataclass(frozen=True)
class _Parts:
    """Bias plus SI and infinite-imputation variances for one parameter."""

    bias: Optional[float]
    var_si: Optional[float]
    var_inf: Optional[float]


def _summary(truth: float, bias: Optional[float], var: Optional[float]) -> MomentSummary:
    se = None if var is None else math.sqrt(max(var, 0.0))
    return MomentSummary.from_bias_se(truth, bias, se)


def _complete_data_parts(spec: SampleSpec) -> tuple[_Parts, _Parts, _Parts]:
    # no imputation: SI is the complete-sample mean / unbiased variance / its root
    full = observed_moments(EstimatorConfig.mlike(0.0), spec)
    out = []
    for m in full:
        var = m.se**2
        out.append(_Parts(m.bias, var, var))
    return tuple(out)


def _mlike_parts(c_M: float, spec: SampleSpec, quad: QuadratureSpec) -> tuple[_Parts, _Parts, _Parts]:
    sigma = spec.sigma
    n, n_obs, n_mis = spec.n, spec.n_obs, spec.n_mis
    nu_obs, nu_mis = spec.nu_obs, spec.nu_mis
    k = nu_obs + c_M
    if k <= 0:
        undefined = _Parts(None, None, None)
        return undefined, undefined, undefined
    r = n_obs / n

    mu = _Parts(0.0, sigma**2 * (1 / n_obs + n_mis * nu_obs / (n**2 * k)), sigma**2 / n_obs)

    e_g = nu_mis + r
    e_g2 = 2 * nu_mis + 2 * r**2 + e_g**2
    m1 = 1 + e_g / k
    m2 = 1 + 2 * e_g / k + e_g2 / k**2
    s4 = sigma**4 / (n - 1) ** 2
    e_s2 = sigma**2 * nu_obs * m1 / (n - 1)
    sigma2 = _Parts(
        e_s2 - sigma**2,
        s4 * (nu_obs * (nu_obs + 2) * m2 - nu_obs**2 * m1**2),
        s4 * 2 * nu_obs * m1**2,
    )

    h = numeric_expectation(lambda u, w: np.sqrt(1 + (u + r * w) / k), nu_mis, quad)
    root_u = mean_sqrt_chi2(nu_obs)
    e_s = sigma * root_u * h / math.sqrt(n - 1)
    sd = _Parts(
        e_s - sigma,
        e_s2 - e_s**2,
        sigma**2 * h**2 * (nu_obs - root_u**2) / (n - 1),
    )
    return mu, sigma2, sd


def _pd_parts(nu_prior: float, spec: SampleSpec) -> tuple[_Parts, _Parts, _Parts]:
    sigma = spec.sigma
    n, n_obs, n_mis = spec.n, spec.n_obs, spec.n_mis
    nu_obs = spec.nu_obs
    nu_pd = nu_obs + nu_prior
    if nu_pd <= 0:
        undefined = _Parts(None, None, None)
        return undefined, undefined, undefined
    a = nu_pd - 2  # E(1/U_PD) = 1/a

    mu = _Parts(
        0.0 if nu_pd > 1 else None,
        sigma**2 / n_obs * (1 + n_mis * nu_obs / (n * a)) if a > 0 else None,
        sigma**2 / n_obs,
    )

    s4 = sigma**4 / (n - 1) ** 2
    e_s2 = None
    sigma2 = _Parts(None, None, None)
    if a > 0:
        m1 = 1 + n_mis / a
        e_s2 = sigma**2 * nu_obs * m1 / (n - 1)
        var_si = None
        if a > 2:
            m2 = 1 + 2 * n_mis / a + n_mis * (n_mis + 2) / (a * (a - 2))
            var_si = s4 * (nu_obs * (nu_obs + 2) * m2 - nu_obs**2 * m1**2)
        # E - sigma^2 simplified, so nu_prior = 2 gives an exact zero
        bias = sigma**2 * n_mis * (2 - nu_prior) / ((n - 1) * a)
        sigma2 = _Parts(bias, var_si, s4 * 2 * nu_obs * m1**2)

    sd = _Parts(None, None, None)
    if nu_pd > 1:
        # E sqrt(1 + Q/U_PD) = E B^(-1/2) with B ~ Beta(nu_pd/2, n_mis/2)
        ratio = math.exp(
            log_gamma((nu_pd - 1) / 2)
            + log_gamma((nu_pd + n_mis) / 2)
            - log_gamma(nu_pd / 2)
            - log_gamma((nu_pd + n_mis - 1) / 2)
        )
        root_u = mean_sqrt_chi2(nu_obs)
        e_s = sigma * root_u * ratio / math.sqrt(n - 1)
        sd = _Parts(
            e_s - sigma,
            e_s2 - e_s**2 if e_s2 is not None else None,
            sigma**2 * ratio**2 * (nu_obs - root_u**2) / (n - 1),
        )
    return mu, sigma2, sd


def _parts(config: EstimatorConfig, spec: SampleSpec, quad: QuadratureSpec):
    if spec.n_mis == 0:
        return _complete_data_parts(spec)
    if config.is_mlike:
        return _mlike_parts(config.c_M, spec, quad)
    return _pd_parts(config.nu_prior, spec)


def _combine(spec: SampleSpec, parts, D: float) -> MomentTriple:
    truths = (spec.mu, spec.sigma**2, spec.sigma)
    out = []
    for truth, p in zip(truths, parts):
        if D == 1:
            var = p.var_si
        elif D == INFINITE:
            var = p.var_inf
        elif p.var_si is None or p.var_inf is None:
            var = None
        else:
            var = (1 - 1 / D) * p.var_inf + p.var_si / D
        out.append(_summary(truth, p.bias, var))
    return MomentTriple(*out)


def si_moments(config: EstimatorConfig, spec: SampleSpec, quad: QuadratureSpec = QuadratureSpec()) -> MomentTriple:
    """Moments of the single-imputation estimators (mean, variance, SD of the completed sample)."""
    return _combine(spec, _parts(config, spec, quad), 1)


def inf_moments(config: EstimatorConfig, spec: SampleSpec, quad: QuadratureSpec = QuadratureSpec()) -> MomentTriple:
    """Moments of the D -> infinity limit; biases equal the SI biases."""
    return _combine(spec, _parts(config, spec, quad), INFINITE)


def mi_moments(req: MIMomentRequest, quad: QuadratureSpec = QuadratureSpec()) -> MomentTriple:
    """Moments of the D-imputation estimators.

    The variance is ``(1 - 1/D) V_inf + V_SI / D`` for each parameter and is
    Undefined whenever either piece is.
    """
    return _combine(req.spec, _parts(req.config, req.spec, quad), req.D)


def moments_for_d(
    config: EstimatorConfig, spec: SampleSpec, D: float, quad: QuadratureSpec = QuadratureSpec()
) -> MomentTriple:
    return mi_moments(MIMomentRequest(config, spec, D), quad)


__all__ = [
    "INFINITE",
    "MIMomentRequest",
    "QuadratureSpec",
    "inf_moments",
    "mi_moments",
    "moments_for_d",
    "numeric_expectation",
    "si_moments",
]
