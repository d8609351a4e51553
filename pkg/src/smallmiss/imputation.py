"""Single and multiple imputation under ML imputation and PD imputation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .estimators import (
    EstimatorConfig,
    ObservedSample,
    ParamEstimate,
    SampleSpec,
    draw_pd,
    estimate_mlike,
    generate_observed,
)
from .randcore import RngStream


class DegenerateSampleError(ValueError):
    pass


@dataclass(frozen=True)
class CompletedSample:
    observed: ObservedSample
    imputed: np.ndarray

    @property
    def n_mis(self) -> int:
        return self.imputed.shape[-1]

    @property
    def n(self) -> int:
        return self.observed.n_obs + self.n_mis

    def values(self) -> np.ndarray:
        return np.concatenate([self.observed.values, self.imputed], axis=-1)


@dataclass(frozen=True)
class MIResult:
    config: EstimatorConfig
    per_imputation: list[ParamEstimate]
    pooled: ParamEstimate
    within_mean_sigma2: np.ndarray | float
    # None when D == 1: the between variance divides by D - 1
    between_mu: Optional[np.ndarray | float]

    @property
    def D(self) -> int:
        return len(self.per_imputation)


def impute_once(obs: ObservedSample, est: ParamEstimate, n_mis: int, rng: RngStream) -> CompletedSample:
    if n_mis < 0:
        raise ValueError("n_mis must be non-negative")
    shape = obs.batch_shape + (n_mis,)
    z = rng.normal(0.0, 1.0, shape)
    mu = np.asarray(est.mu_hat)[..., None]
    sd = np.asarray(est.sigma_hat)[..., None]
    return CompletedSample(obs, mu + sd * z)


def si_estimate(comp: CompletedSample) -> ParamEstimate:
    """Mean, (n-1)-divisor variance and its root over the completed sample."""
    if comp.n < 2:
        raise DegenerateSampleError("need n >= 2 values")
    y = comp.values()
    mean = y.mean(axis=-1)
    sigma2 = ((y - mean[..., None]) ** 2).sum(axis=-1) / (comp.n - 1)
    return ParamEstimate(mean, sigma2, np.sqrt(sigma2))


def si_decomposition(comp: CompletedSample) -> tuple:
    """Within-observed, within-imputed and between parts of (n - 1) * sigma2_SI.

    Returns ``((n_obs-1) s_obs^2, (n_mis-1) s_imp^2, s_btw^2)``; their sum over
    ``n - 1`` is the SI variance.
    """
    obs = comp.observed
    imp = comp.imputed
    mean = (obs.n_obs * obs.mean + imp.sum(axis=-1)) / comp.n
    if comp.n_mis:
        imp_mean = imp.mean(axis=-1)
        within_imp = ((imp - imp_mean[..., None]) ** 2).sum(axis=-1)
    else:
        imp_mean = mean
        within_imp = np.zeros_like(obs.css)
    between = obs.n_obs * (obs.mean - mean) ** 2 + comp.n_mis * (imp_mean - mean) ** 2
    return obs.css, within_imp, between


def run_mi(
    spec: SampleSpec,
    config: EstimatorConfig,
    D: int,
    rng: RngStream,
    obs: ObservedSample,
) -> MIResult:
    """Impute ``spec.n_mis`` values ``D`` times and pool the SI estimates.

    ML imputation fits the observed-data estimate once and reuses it; PD
    imputation takes a fresh posterior draw in every iteration.
    """
    if D < 1:
        raise ValueError("D must be at least 1")
    fixed = estimate_mlike(obs, config.c_M) if config.is_mlike else None
    per: list[ParamEstimate] = []
    for _ in range(D):
        est = fixed if fixed is not None else draw_pd(obs, config.nu_prior, rng)
        per.append(si_estimate(impute_once(obs, est, spec.n_mis, rng)))

    mus = np.stack([np.asarray(p.mu_hat) for p in per])
    s2 = np.stack([np.asarray(p.sigma2_hat) for p in per])
    s1 = np.stack([np.asarray(p.sigma_hat) for p in per])
    pooled = ParamEstimate(_scalar(mus.mean(axis=0)), _scalar(s2.mean(axis=0)), _scalar(s1.mean(axis=0)))
    between = None
    if D >= 2:
        between = _scalar(((mus - mus.mean(axis=0)) ** 2).sum(axis=0) / (D - 1))
    return MIResult(config, per, pooled, pooled.sigma2_hat, between)


def _scalar(x: np.ndarray):
    return float(x) if np.ndim(x) == 0 else x


def mi_replications(
    spec: SampleSpec,
    config: EstimatorConfig,
    D: int,
    rng: RngStream,
    size: int,
) -> tuple[ObservedSample, MIResult]:
    """``size`` independent observed samples, each multiply imputed, from one stream."""
    obs = generate_observed(spec, rng, size=size)
    return obs, run_mi(spec, config, D, rng, obs)


__all__ = [
    "CompletedSample",
    "DegenerateSampleError",
    "MIResult",
    "impute_once",
    "mi_replications",
    "run_mi",
    "si_decomposition",
    "si_estimate",
]
