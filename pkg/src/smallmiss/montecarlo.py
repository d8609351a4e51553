"""Seeded Monte Carlo campaigns that check the exact moments.

Replications are cut into fixed-size blocks. Block ``b`` draws everything
from ``RngStream(master_seed, b)``, blocks may run on any thread, and their
outputs are concatenated in block order, so a campaign is reproducible bit
for bit regardless of scheduling.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .estimators import EstimatorConfig, SampleSpec
from .exact_moments import QuadratureSpec, moments_for_d
from .imputation import mi_replications
from .randcore import RngStream
from .se_estimation import rubin_variance_bias

DEFAULT_BLOCK = 10_000
Z_GATE = 4.0


@dataclass(frozen=True)
class Replications:
    """Per-replication pooled estimates, each an array of length ``replications``."""

    mu: np.ndarray
    sigma2: np.ndarray
    sigma: np.ndarray
    # Rubin's variance estimate W + (D+1)/D B; only for PD imputation with D >= 2
    rubin_variance: Optional[np.ndarray]


def _block(spec, config, D, master_seed, index, size):
    _, mi = mi_replications(spec, config, D, RngStream(master_seed, index), size)
    rubin = None
    if not config.is_mlike and D >= 2:
        rubin = mi.within_mean_sigma2 / spec.n + (D + 1) / D * mi.between_mu
    p = mi.pooled
    return np.asarray(p.mu_hat), np.asarray(p.sigma2_hat), np.asarray(p.sigma_hat), rubin


def simulate(
    config: EstimatorConfig,
    spec: SampleSpec,
    D: int,
    replications: int,
    master_seed: int,
    block_size: int = DEFAULT_BLOCK,
    workers: Optional[int] = None,
) -> Replications:
    sizes = [block_size] * (replications // block_size)
    if replications % block_size:
        sizes.append(replications % block_size)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda ib: _block(spec, config, D, master_seed, *ib), enumerate(sizes)))
    mu, s2, s1, rubin = (list(x) for x in zip(*parts))
    return Replications(
        np.concatenate(mu),
        np.concatenate(s2),
        np.concatenate(s1),
        None if rubin[0] is None else np.concatenate(rubin),
    )


@dataclass(frozen=True)
class MomentCheck:
    parameter: str
    moment: str
    closed_form: Optional[float]
    empirical: float
    mc_se: float
    z_score: Optional[float]
    note: str = ""


@dataclass(frozen=True)
class VerifyReport:
    estimator: str
    mu: float
    sigma: float
    n_obs: int
    n_mis: int
    D: int
    replications: int
    master_seed: int
    checks: list[MomentCheck]

    @property
    def passed(self) -> bool:
        return all(c.z_score is None or abs(c.z_score) < Z_GATE for c in self.checks)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["passed"] = self.passed
        return out


def _finite_moment_order(config: EstimatorConfig, spec: SampleSpec, parameter: str) -> float:
    """Moment orders r < this value have E|estimator|^r finite."""
    if config.is_mlike or spec.n_mis == 0:
        return math.inf
    # every PD estimator carries sigma_PD (sigma2_PD for sigma2); E sigma_PD^r < inf iff nu_PD > r
    nu_pd = spec.nu_obs + config.nu_prior
    return nu_pd / (2.0 if parameter == "sigma2" else 1.0)


def _check(parameter, moment, closed, sample, order_ok, note_missing):
    x = np.asarray(sample, dtype=float)
    R = x.size
    if moment == "se":
        dev = x - x.mean()
        m2 = float(np.mean(dev**2))
        m4 = float(np.mean(dev**4))
        emp = math.sqrt(m2 * R / (R - 1))
        # delta method: Var(s) ~ Var(s^2) / (4 s^2), Var(s^2) ~ (m4 - m2^2) / R
        mc_se = math.sqrt(max(m4 - m2**2, 0.0) / R) / (2 * emp) if emp > 0 else 0.0
    else:
        emp = float(x.mean())
        mc_se = float(x.std(ddof=1) / math.sqrt(R))
    z = None
    note = ""
    if closed is None:
        note = "closed form undefined"
    elif not order_ok:
        note = note_missing
    elif mc_se > 0:
        z = (emp - closed) / mc_se
    elif emp != closed:
        z = math.inf
    else:
        z = 0.0
    return MomentCheck(parameter, moment, closed, emp, mc_se, z, note)


def verify(
    config: EstimatorConfig,
    spec: SampleSpec,
    D: int,
    replications: int,
    master_seed: int,
    quad: QuadratureSpec = QuadratureSpec(),
    block_size: int = DEFAULT_BLOCK,
    workers: Optional[int] = None,
) -> VerifyReport:
    """Compare empirical moments of the D-imputation estimators with the exact ones.

    A z-score is only formed when the moment it tests has a finite-variance
    Monte Carlo estimate: expectations need a finite second moment of the
    estimator, SEs a finite fourth moment. Otherwise the check is reported
    with ``z_score = None`` and a note.
    """
    exact = moments_for_d(config, spec, D, quad)
    reps = simulate(config, spec, D, replications, master_seed, block_size, workers)
    checks = []
    for name, summary, draws in (
        ("mu", exact.mu, reps.mu),
        ("sigma2", exact.sigma2, reps.sigma2),
        ("sigma", exact.sigma, reps.sigma),
    ):
        order = _finite_moment_order(config, spec, name)
        checks.append(_check(name, "expectation", summary.expectation, draws, order > 2,
                             "estimator variance infinite"))
        checks.append(_check(name, "se", summary.se, draws, order > 4,
                             "fourth moment infinite; MC error of the SE not estimable"))
    if reps.rubin_variance is not None:
        # E[V_hat - (mu_hat - mu)^2] estimates the bias of Rubin's variance directly
        per_rep = reps.rubin_variance - (reps.mu - spec.mu) ** 2
        order = _finite_moment_order(config, spec, "mu")
        checks.append(_check("mu", "rubin_variance_bias", rubin_variance_bias(config.nu_prior, spec),
                             per_rep, order > 4, "fourth moment infinite"))
    return VerifyReport(
        config.label, spec.mu, spec.sigma, spec.n_obs, spec.n_mis, D, replications, master_seed, checks
    )
