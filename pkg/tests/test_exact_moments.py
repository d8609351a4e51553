import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import mc_z
from smallmiss.estimators import TABLE_PRESETS, EstimatorConfig, SampleSpec, observed_moments
from smallmiss.exact_moments import (
    INFINITE,
    MIMomentRequest,
    QuadratureSpec,
    inf_moments,
    mi_moments,
    moments_for_d,
    si_moments,
)
from smallmiss.montecarlo import simulate
from smallmiss.randcore import RngStream, mean_sqrt_chi2

M = EstimatorConfig.mlike
PD = EstimatorConfig.posterior_draw


def _cells(s):
    return (s.expectation, s.bias, s.se, s.rmse)


def _close(got, want, tol=0.01):
    return all(abs(g - w) <= tol for g, w in zip(got, want))


def test_si_examples():
    t = si_moments(M(0), SampleSpec(1, 1, 5, 5))
    assert _close(_cells(t.sigma2), (0.94, -0.06, 0.78, 0.78))
    t = si_moments(PD(2), SampleSpec(1, 1, 20, 20))
    assert abs(t.sigma2.bias) <= 0.01 and abs(t.sigma2.se - 0.41) <= 0.01
    t = si_moments(PD(0), SampleSpec(1, 1, 5, 5))
    assert abs(t.sigma2.expectation - 1.56) <= 0.01 and t.sigma2.se is None


@pytest.mark.parametrize("c", [0, 1, 2])
@pytest.mark.parametrize("n_obs", [3, 5, 20])
def test_no_missing_values_gives_complete_data_moments(c, n_obs):
    t = si_moments(M(c), SampleSpec(1, 2.0, n_obs, 0))
    assert t.sigma2.bias == 0.0
    assert t.sigma2.se == pytest.approx(4.0 * math.sqrt(2 / (n_obs - 1)), rel=1e-12)


def test_inf_examples():
    for cfg in (M(0), M(1), PD(0), PD(2), PD(7)):
        assert inf_moments(cfg, SampleSpec(1, 1, 20, 20)).mu.se == pytest.approx(1 / math.sqrt(20), rel=1e-12)
    spec = SampleSpec(1, 1, 20, 20)
    assert inf_moments(PD(7), spec).sigma2.se < si_moments(PD(7), spec).sigma2.se
    spec = SampleSpec(1, 1, 5, 5)
    assert abs(inf_moments(M(1), spec).sigma.bias - si_moments(M(1), spec).sigma.bias) < 1e-8


def test_mi_examples():
    spec = SampleSpec(1, 1, 5, 5)
    assert mi_moments(MIMomentRequest(M(1), spec, 1)) == si_moments(M(1), spec)
    t = mi_moments(MIMomentRequest(PD(2), spec, 5))
    assert _close(_cells(t.sigma2), (1.00, 0.00, 0.82, 0.82))
    t = mi_moments(MIMomentRequest(M(0), SampleSpec(1, 1, 100, 100), 5))
    assert abs(t.sigma2.se - 0.15) <= 0.01


def test_infinite_request_is_inf_moments():
    spec = SampleSpec(1, 1, 20, 20)
    assert moments_for_d(PD(4), spec, INFINITE) == inf_moments(PD(4), spec)


@pytest.mark.parametrize("D", [0, 2.5, -1])
def test_bad_d(D):
    with pytest.raises(ValueError):
        MIMomentRequest(M(0), SampleSpec(1, 1, 5, 5), D)


@pytest.mark.parametrize("label", TABLE_PRESETS)
@pytest.mark.parametrize("n", [5, 20])
def test_se_non_increasing_in_d_and_limit(label, n):
    cfg = EstimatorConfig.from_label(label)
    spec = SampleSpec(1, 1, n, n)
    runs = [moments_for_d(cfg, spec, D) for D in (1, 2, 5, 20, 1000)]
    inf = inf_moments(cfg, spec)
    for p in range(3):
        ses = [r[p].se for r in runs]
        if any(s is None for s in ses):
            continue
        assert all(a >= b - 1e-15 for a, b in zip(ses, ses[1:]))
        assert abs(ses[-1] - inf[p].se) < 1e-3
        assert all(r[p].bias == runs[0][p].bias for r in runs)


@pytest.mark.parametrize("c_M", [0, 1, 2])
@pytest.mark.parametrize("n_obs, n_mis, D", [(5, 5, 1), (5, 5, 5), (20, 7, 3), (100, 100, 50)])
def test_mean_se_closed_form(c_M, n_obs, n_mis, D):
    spec = SampleSpec(0, 1.7, n_obs, n_mis)
    n = n_obs + n_mis
    want = 1.7 * math.sqrt(1 / n_obs + n_mis * (n_obs - 1) / (D * n**2 * (c_M + n_obs - 1)))
    assert moments_for_d(M(c_M), spec, D).mu.se == pytest.approx(want, rel=1e-12)


def test_inf_families_converge():
    def gap(n):
        spec = SampleSpec(1, 1, n, n)
        return abs(inf_moments(PD(2), spec).sigma2.se - inf_moments(M(0), spec).sigma2.se)

    assert gap(400) < gap(10) / 10


@pytest.mark.parametrize("n_obs, nu_prior, n_mis", [(5, 0, 5), (5, -1.5, 3), (7, 0, 20), (20, 7, 20)])
def test_pd_sigma_expectation_against_beta_integral(n_obs, nu_prior, n_mis):
    # E sqrt(1 + Q/U_PD) = E B^(-1/2) with B ~ Beta(nu_PD/2, n_mis/2)
    a = mpmath.mpf(n_obs - 1 + nu_prior) / 2
    b = mpmath.mpf(n_mis) / 2
    ratio = mpmath.quad(lambda x: x ** (a - 1.5) * (1 - x) ** (b - 1), [0, 1]) / mpmath.beta(a, b)
    spec = SampleSpec(0, 1, n_obs, n_mis)
    want = mean_sqrt_chi2(spec.nu_obs) * float(ratio) / math.sqrt(spec.n - 1)
    assert si_moments(PD(nu_prior), spec).sigma.expectation == pytest.approx(want, rel=1e-10)


@pytest.mark.parametrize("cfg, n_obs, n_mis", [(M(1), 5, 5), (M(0), 20, 8), (PD(7), 5, 5), (PD(4), 20, 20)])
def test_si_sigma2_from_representation(cfg, n_obs, n_mis):
    # draw the product form directly: sigma2_SI = U_obs/(n-1) (1 + G/k)
    rng = RngStream(31337, n_obs)
    R = 2 * 10**6
    n = n_obs + n_mis
    u_obs = rng.chi_square(n_obs - 1, R)
    if cfg.is_mlike:
        g = rng.chi_square(n_mis - 1, R) + n_obs / n * rng.chi_square(1, R)
        x = u_obs / (n - 1) * (1 + g / (n_obs - 1 + cfg.c_M))
    else:
        q = rng.chi_square(n_mis, R)
        x = u_obs / (n - 1) * (1 + q / rng.chi_square(n_obs - 1 + cfg.nu_prior, R))
    t = si_moments(cfg, SampleSpec(1, 1, n_obs, n_mis))
    assert abs(mc_z(x, t.sigma2.expectation)) < 4
    assert abs(mc_z(x, t.sigma2.se, "se")) < 4
    assert abs(mc_z(np.sqrt(x), t.sigma.expectation)) < 4
    assert abs(mc_z(np.sqrt(x), t.sigma.se, "se")) < 4


@settings(max_examples=150, deadline=None)
@given(
    st.one_of(
        st.builds(EstimatorConfig.mlike, st.floats(-0.5, 8)),
        st.builds(EstimatorConfig.posterior_draw, st.floats(-3, 10)),
    ),
    st.integers(2, 60),
    st.integers(0, 60),
    st.one_of(st.integers(1, 200), st.just(INFINITE)),
    st.floats(0.2, 5),
)
def test_rmse_identity(cfg, n_obs, n_mis, D, sigma):
    t = moments_for_d(cfg, SampleSpec(0.5, sigma, n_obs, n_mis), D)
    for s in t:
        if s.bias is None or s.se is None:
            assert s.rmse is None
            continue
        assert abs(s.rmse**2 - (s.bias**2 + s.se**2)) <= 1e-10 * max(1.0, s.rmse**2)
        assert s.expectation is not None


def test_every_config_reduces_to_complete_data_without_missing_values():
    spec = SampleSpec(1, 1, 20, 0)
    for label in TABLE_PRESETS:
        cfg = EstimatorConfig.from_label(label)
        assert si_moments(cfg, spec) == observed_moments(M(0), spec)


def test_quadrature_settings_do_not_move_results():
    spec = SampleSpec(1, 1, 5, 5)
    a = si_moments(M(1), spec)
    b = si_moments(M(1), spec, QuadratureSpec(160, 1e-11))
    assert a.sigma.expectation == pytest.approx(b.sigma.expectation, rel=1e-9)


GRAND = [(label, n, D) for label in TABLE_PRESETS for n in (5, 20) for D in (1, 5)]


@pytest.mark.parametrize("label, n, D", GRAND)
def test_grand_monte_carlo_oracle(label, n, D):
    cfg = EstimatorConfig.from_label(label)
    spec = SampleSpec(1.0, 1.0, n, n)
    exact = moments_for_d(cfg, spec, D)
    reps = simulate(cfg, spec, D, 200_000, master_seed=8675309)
    nu_pd = n - 1 + cfg.nu_prior
    for name, draws, summary in (("mu", reps.mu, exact.mu), ("sigma2", reps.sigma2, exact.sigma2),
                                 ("sigma", reps.sigma, exact.sigma)):
        # sigma_PD^r has finite mean iff nu_PD > r; sigma2 doubles the order
        order = math.inf if cfg.is_mlike else nu_pd / (2 if name == "sigma2" else 1)
        if summary.expectation is not None and order > 2:
            assert abs(mc_z(draws, summary.expectation)) < 4, (name, "expectation")
        if summary.se is not None and order > 4:
            assert abs(mc_z(draws, summary.se, "se")) < 4, (name, "se")
