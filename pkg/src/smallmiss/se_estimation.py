"""Standard-error estimators for the mean and the exact bias of Rubin's variance."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .estimators import ParamEstimate, SampleSpec
from .imputation import MIResult


class SEMethod(str, Enum):
    OBSERVED_ML = "ObservedML"
    WANG_ROBINS = "WangRobins"
    RUBIN_RULES = "RubinRules"


class MethodMismatchError(ValueError):
    pass


class InsufficientImputationsError(ValueError):
    pass


@dataclass(frozen=True)
class SEEstimate:
    value: np.ndarray | float
    method: SEMethod
    within: Optional[np.ndarray | float] = None
    between: Optional[np.ndarray | float] = None
    D: Optional[int] = None

    @property
    def variance(self):
        return np.square(self.value)


def se_observed_mu(est: ParamEstimate, n_obs: int) -> SEEstimate:
    if n_obs < 2:
        raise ValueError("n_obs must be at least 2")
    # sqrt(sigma2 / n_obs) rather than sigma / sqrt(n_obs) so the ML-imputation
    # SE with no missing values reproduces this value bit for bit
    return SEEstimate(np.sqrt(est.sigma2_hat / n_obs), SEMethod.OBSERVED_ML)


def wang_robins_se(v_obs, gamma: float, D: int, w_bar):
    """General ML-imputation SE: sqrt(V_obs + (gamma / D) * W_bar)."""
    return np.sqrt(v_obs + gamma / D * w_bar)


def se_mi_ml_mu(obs_est: ParamEstimate, mi: MIResult, spec: SampleSpec) -> SEEstimate:
    """SE of the ML-imputation MI mean.

    ``sqrt(sigma2_obs / n_obs + n_mis / (D n^2) * sigma2_MI)``, the mean-specific
    form of :func:`wang_robins_se` with gamma = n_mis / n and W_bar = sigma2_MI / n.
    """
    if not mi.config.is_mlike:
        raise MethodMismatchError("se_mi_ml_mu needs an ML-imputation MIResult")
    n = spec.n
    D = mi.D
    value = np.sqrt(obs_est.sigma2_hat / spec.n_obs + spec.n_mis / (D * n**2) * mi.within_mean_sigma2)
    return SEEstimate(value, SEMethod.WANG_ROBINS, within=mi.within_mean_sigma2 / n, D=D)


def se_mi_pd_mu(mi: MIResult, n: int) -> SEEstimate:
    """Rubin's-rules SE of the PD-imputation MI mean: sqrt(W_bar + (D+1)/D * B)."""
    if mi.config.is_mlike:
        raise MethodMismatchError("se_mi_pd_mu needs a PD-imputation MIResult")
    if mi.D < 2 or mi.between_mu is None:
        raise InsufficientImputationsError("Rubin's rules need D >= 2")
    D = mi.D
    within = mi.within_mean_sigma2 / n
    value = np.sqrt(within + (D + 1) / D * mi.between_mu)
    return SEEstimate(value, SEMethod.RUBIN_RULES, within=within, between=mi.between_mu, D=D)


def rubin_variance_bias(nu_prior: float, spec: SampleSpec) -> Optional[float]:
    """Exact bias of Rubin's variance estimate for the PD-imputation mean.

    Independent of D. Zero at ``nu_prior = 2`` or ``n_mis = 0``; ``None`` when
    ``n_obs + nu_prior - 3 <= 0``.
    """
    n, n_obs, n_mis = spec.n, spec.n_obs, spec.n_mis
    if n_mis == 0:
        return 0.0
    a = n_obs + nu_prior - 3
    if a <= 0:
        return None
    return -(spec.sigma**2) * n_mis * (n + n_obs - 1) * (nu_prior - 2) / ((n - 1) * n * n_obs * a)
