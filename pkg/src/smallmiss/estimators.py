"""Observed-data estimators of (mu, sigma^2, sigma) and their exact moments.

Two families are covered. ML-like estimators divide the centered sum of
squares by ``nu_obs + c_M``; posterior-draw (PD) estimators divide it by a
chi-square draw with ``nu_obs + nu_prior`` degrees of freedom and then draw
the mean around the sample mean.

Everything accepts a leading batch dimension: an ``ObservedSample`` whose
``values`` has shape ``(R, n_obs)`` holds ``R`` independent replications, and
the estimates built from it carry arrays of shape ``(R,)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Optional

import numpy as np

from .randcore import RngStream, mean_inv_sqrt_chi2, mean_sqrt_chi2


class InadmissibleConfigError(ValueError):
    """The estimator constant or prior leaves a non-positive divisor or df."""


class Family(str, Enum):
    MLIKE = "MLike"
    POSTERIOR_DRAW = "PosteriorDraw"


# row order of the reference tables
TABLE_PRESETS = ("M0", "M1", "M2", "PD-2", "PD0", "PD2", "PD4", "PD6", "PD7")
PRESETS = TABLE_PRESETS + ("PD1",)


@dataclass(frozen=True)
class EstimatorConfig:
    family: Family
    c_M: float = 0.0
    nu_prior: float = 0.0

    @classmethod
    def mlike(cls, c_M: float) -> "EstimatorConfig":
        return cls(Family.MLIKE, c_M=float(c_M))

    @classmethod
    def posterior_draw(cls, nu_prior: float) -> "EstimatorConfig":
        return cls(Family.POSTERIOR_DRAW, nu_prior=float(nu_prior))

    @classmethod
    def from_label(cls, label: str) -> "EstimatorConfig":
        """Resolve ``M0``, ``M1``, ``PD-2``, ``PD7`` ... (``PD−2`` with U+2212 too)."""
        text = label.strip().replace("−", "-").upper()
        try:
            if text.startswith("PD"):
                return cls.posterior_draw(float(text[2:]))
            if text.startswith("M"):
                return cls.mlike(float(text[1:]))
        except ValueError:
            pass
        raise ValueError(f"unknown estimator label {label!r}")

    @property
    def is_mlike(self) -> bool:
        return self.family is Family.MLIKE

    @property
    def label(self) -> str:
        value = self.c_M if self.is_mlike else self.nu_prior
        num = f"{value:g}"
        return ("M" if self.is_mlike else "PD") + num

    def variance_divisor(self, n_obs: int) -> float:
        """nu_obs + c_M for ML-like, nu_PD = nu_obs + nu_prior for PD."""
        extra = self.c_M if self.is_mlike else self.nu_prior
        return n_obs - 1 + extra


@dataclass(frozen=True)
class SampleSpec:
    mu: float = 1.0
    sigma: float = 1.0
    n_obs: int = 5
    n_mis: int = 0

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if self.n_obs < 2:
            raise ValueError("n_obs must be at least 2")
        if self.n_mis < 0:
            raise ValueError("n_mis must be non-negative")

    @property
    def n(self) -> int:
        return self.n_obs + self.n_mis

    @property
    def nu_obs(self) -> int:
        return self.n_obs - 1

    @property
    def nu_mis(self) -> int:
        return self.n_mis - 1


@dataclass(frozen=True)
class ObservedSample:
    values: np.ndarray
    mean: np.ndarray = field(init=False)
    css: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.shape[-1] < 2:
            raise ValueError("need at least two observed values")
        mean = values.mean(axis=-1)
        css = ((values - mean[..., None]) ** 2).sum(axis=-1)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "css", css)

    @property
    def n_obs(self) -> int:
        return self.values.shape[-1]

    @property
    def batch_shape(self) -> tuple:
        return self.values.shape[:-1]


@dataclass(frozen=True)
class ParamEstimate:
    mu_hat: np.ndarray | float
    sigma2_hat: np.ndarray | float
    sigma_hat: np.ndarray | float

    @classmethod
    def from_variance(cls, mu_hat, sigma2_hat) -> "ParamEstimate":
        return cls(mu_hat, sigma2_hat, np.sqrt(sigma2_hat))


@dataclass(frozen=True)
class MomentSummary:
    """Expectation, bias, SE and RMSE of one estimator; ``None`` marks Undefined."""

    expectation: Optional[float]
    bias: Optional[float]
    se: Optional[float]
    rmse: Optional[float]

    @classmethod
    def from_bias_se(cls, truth: float, bias: Optional[float], se: Optional[float]) -> "MomentSummary":
        expectation = None if bias is None else truth + bias
        rmse = None if bias is None or se is None else math.hypot(bias, se)
        return cls(expectation, bias, se, rmse)

    @classmethod
    def undefined(cls) -> "MomentSummary":
        return cls(None, None, None, None)


class MomentTriple(NamedTuple):
    mu: MomentSummary
    sigma2: MomentSummary
    sigma: MomentSummary


def generate_observed(spec: SampleSpec, rng: RngStream, size: int | None = None) -> ObservedSample:
    """Draw ``n_obs`` values from N(mu, sigma^2); ``size`` adds a replication axis."""
    shape = (spec.n_obs,) if size is None else (size, spec.n_obs)
    return ObservedSample(rng.normal(spec.mu, spec.sigma, shape))


def estimate_mlike(sample: ObservedSample, c_M: float) -> ParamEstimate:
    divisor = sample.n_obs - 1 + c_M
    if divisor <= 0:
        raise InadmissibleConfigError(f"nu_obs + c_M = {divisor} must be positive")
    return ParamEstimate.from_variance(sample.mean, sample.css / divisor)


def draw_pd(sample: ObservedSample, nu_prior: float, rng: RngStream) -> ParamEstimate:
    """One posterior draw of (mu, sigma^2) under the prior sigma^(-nu_prior-2)."""
    nu_pd = sample.n_obs - 1 + nu_prior
    if nu_pd <= 0:
        raise InadmissibleConfigError(f"nu_PD = nu_obs + nu_prior = {nu_pd} must be positive")
    shape = sample.batch_shape or None
    u_pd = rng.chi_square(nu_pd, shape)
    sigma2 = sample.css / u_pd
    sigma = np.sqrt(sigma2)
    z_pd = rng.normal(0.0, 1.0, shape) / math.sqrt(sample.n_obs)
    return ParamEstimate(sample.mean + sigma * z_pd, sigma2, sigma)


def observed_estimate(sample: ObservedSample, config: EstimatorConfig, rng: RngStream) -> ParamEstimate:
    if config.is_mlike:
        return estimate_mlike(sample, config.c_M)
    return draw_pd(sample, config.nu_prior, rng)


def observed_moments(config: EstimatorConfig, spec: SampleSpec) -> MomentTriple:
    """Exact expectation, bias, SE and RMSE of the observed-data estimators.

    A component is Undefined (``None``) whenever its closed form would divide
    by zero or take the root of a negative number; the remaining components
    are still computed.
    """
    mu, sigma = spec.mu, spec.sigma
    n_obs, nu_obs = spec.n_obs, spec.nu_obs
    root_u = mean_sqrt_chi2(nu_obs)  # E sqrt(U_obs)

    if config.is_mlike:
        k = nu_obs + config.c_M
        mu_sum = MomentSummary.from_bias_se(mu, 0.0, sigma / math.sqrt(n_obs))
        if k <= 0:
            return MomentTriple(mu_sum, MomentSummary.undefined(), MomentSummary.undefined())
        s2 = MomentSummary.from_bias_se(
            sigma**2, -(sigma**2) * config.c_M / k, sigma**2 * math.sqrt(2 * nu_obs) / k
        )
        e_sigma = sigma * root_u / math.sqrt(k)
        var_sigma = sigma**2 * (nu_obs - root_u**2) / k
        s1 = MomentSummary.from_bias_se(sigma, e_sigma - sigma, math.sqrt(max(var_sigma, 0.0)))
        return MomentTriple(mu_sum, s2, s1)

    nu_pd = config.variance_divisor(n_obs)
    if nu_pd <= 0:
        return MomentTriple(MomentSummary.undefined(), MomentSummary.undefined(), MomentSummary.undefined())
    a = nu_pd - 2  # n_obs + nu_prior - 3; E(1/U_PD) = 1/a

    # E|mu_hat| needs E sigma_hat, i.e. nu_PD > 1
    mu_bias = 0.0 if nu_pd > 1 else None
    mu_se = sigma * math.sqrt((a + nu_obs) / (n_obs * a)) if a > 0 else None
    mu_sum = MomentSummary.from_bias_se(mu, mu_bias, mu_se)

    s2_bias = sigma**2 * (2 - config.nu_prior) / a if a > 0 else None
    s2_se = None
    if a > 0 and a - 2 > 0:
        s2_se = sigma**2 * math.sqrt(2 * nu_obs * (a + nu_obs) / ((a - 2) * a**2))
    s2 = MomentSummary.from_bias_se(sigma**2, s2_bias, s2_se)

    s1_bias = s1_se = None
    if nu_pd > 1:
        e_ratio = root_u * mean_inv_sqrt_chi2(nu_pd)
        s1_bias = sigma * (e_ratio - 1)
        if a > 0:
            s1_se = sigma * math.sqrt(max(nu_obs / a - e_ratio**2, 0.0))
    s1 = MomentSummary.from_bias_se(sigma, s1_bias, s1_se)
    return MomentTriple(mu_sum, s2, s1)
