import datetime as dt
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad
from scipy.stats import chi2

from cointjump.bipoisson import JumpLaw
from cointjump.calibration import (DeseasonalizedSeries, PriceSeries, Theta, deseasonalize, fit_joint,
                                   fit_single_asset, joint_log_likelihood, log_likelihood_1d,
                                   price_series_from_residuals, simulate_pair, simulate_single,
                                   transition_density_1d)
from cointjump.errors import DomainError, FitError

DT = 1.0 / 365.0
TRUTH = Theta(k=42.5, sigma=1.66, lam=40.0, jump_m=-0.10, jump_nu=0.30)
START = dt.date(2020, 1, 1)


def as_series(u, start=START):
    dates = tuple(start + dt.timedelta(days=i) for i in range(len(u)))
    return DeseasonalizedSeries(dates, np.asarray(u), lambda d: 0.0, {}, DT)


thetas = st.builds(Theta, k=st.floats(1.0, 100.0), sigma=st.floats(0.2, 3.0), lam=st.floats(0.0, 150.0),
                   jump_m=st.floats(-0.5, 0.5), jump_nu=st.floats(0.0, 0.6))


@settings(max_examples=30, deadline=None)
@given(thetas, st.floats(-0.5, 0.5), st.floats(0.0, 2.0))
def test_transition_density_integrates_to_one(theta, u, t):
    total, _ = quad(lambda x: float(transition_density_1d(x, u, theta, t, DT)), -np.inf, np.inf, limit=200,
                    points=None)
    assert total == pytest.approx(1.0, abs=1e-7)


@settings(max_examples=30, deadline=None)
@given(thetas)
def test_mixture_collapses_without_jump_effect(theta):
    u = simulate_single(TRUTH, 200, DT, seed=1)
    pure = Theta(theta.k, theta.sigma, 0.0, 0.0, 0.0)
    flat = Theta(theta.k, theta.sigma, theta.lam, 0.0, 0.0)
    resid = u[1:] - (1 - theta.k * DT) * u[:-1]
    gauss = float(np.sum(-0.5 * np.log(2 * np.pi * theta.sigma ** 2 * DT) - resid ** 2 / (2 * theta.sigma ** 2 * DT)))
    assert log_likelihood_1d(u, pure, DT) == pytest.approx(gauss, rel=1e-12)
    assert log_likelihood_1d(u, flat, DT) == pytest.approx(gauss, rel=1e-12)


def test_likelihood_matches_the_product_of_transition_densities():
    u = simulate_single(TRUTH, 50, DT, seed=2)
    for clock in ("local", "absolute"):
        want = sum(math.log(float(transition_density_1d(u[i + 1], u[i], TRUTH, i * DT if clock == "absolute" else 0.0,
                                                         DT))) for i in range(len(u) - 1))
        assert log_likelihood_1d(u, TRUTH, DT, clock) == pytest.approx(want, rel=1e-12)
    with pytest.raises(DomainError):
        log_likelihood_1d(u, Theta(1.0, 1.0, 400.0, 0.0, 0.1), DT)


def test_joint_likelihood_factorizes_for_independent_legs():
    th2 = Theta(40.0, 1.5, 50.0, -0.05, 0.4)
    law = JumpLaw("independent", TRUTH.lam, th2.lam)
    u1, u2 = simulate_pair(TRUTH, th2, 0.0, 0.0, law, 300, DT, seed=3)
    joint = joint_log_likelihood(u1, u2, TRUTH, th2, 0.0, 0.0, law.step_probs(DT), DT)
    assert joint == pytest.approx(log_likelihood_1d(u1, TRUTH, DT) + log_likelihood_1d(u2, th2, DT), rel=1e-12)


def _weekly(n, pattern, level=3.4, seed=0):
    u = simulate_single(Theta(42.5, 1.66, 0.0, 0.0, 0.0), n - 1, DT, seed=seed)
    return price_series_from_residuals(u, START, level, pattern)


def test_deseasonalize_constant_series():
    s = PriceSeries(tuple(START + dt.timedelta(days=i) for i in range(60)), np.full(60, 30.0))
    d = deseasonalize(s)
    assert np.abs(d.u).max() < 1e-12
    assert d.seasonal(START) == pytest.approx(math.log(30.0))


def test_deseasonalize_removes_a_period_seven_sinusoid():
    days = np.arange(120)
    prices = np.exp(3.0 + 0.2 * np.sin(2 * np.pi * days / 7))
    d = deseasonalize(PriceSeries(tuple(START + dt.timedelta(days=int(i)) for i in days), prices))
    assert np.abs(d.u).max() < 1e-10


def test_deseasonalize_recovers_a_weekly_pattern():
    pattern = (0.0, 0.3, 0.35, 0.3, 0.2, -0.4, -0.6)
    # five years: each coefficient has sd near 0.008, a quarter of the tolerance
    d = deseasonalize(_weekly(1825, pattern), month_effects=False)
    for wd in range(1, 7):
        assert d.coefficients[f"weekday{wd}"] == pytest.approx(pattern[wd], rel=0.10)


def test_deseasonalize_needs_enough_data():
    with pytest.raises(FitError):
        deseasonalize(_weekly(20, (0.0,) * 7))
    with pytest.raises(DomainError):
        PriceSeries((START, START), np.array([1.0, 2.0]))


def test_single_asset_fit_recovers_parameters():
    u = simulate_single(TRUTH, 4000, DT, seed=7)
    fit = fit_single_asset(as_series(u))
    th = fit.theta
    assert fit.converged
    assert th.k == pytest.approx(TRUTH.k, rel=0.35)
    assert th.sigma == pytest.approx(TRUTH.sigma, rel=0.15)
    assert th.lam == pytest.approx(TRUTH.lam, rel=0.5)
    assert th.jump_nu == pytest.approx(TRUTH.jump_nu, rel=0.3)
    # the optimum is at least as good as the truth
    assert fit.loglik >= log_likelihood_1d(u, TRUTH, DT) - 1e-6


def test_jump_free_data_gives_an_insignificant_jump_component():
    pure = Theta(42.5, 1.66, 0.0, 0.0, 0.0)
    u = simulate_single(pure, 1500, DT, seed=9)
    fit = fit_single_asset(u, dt=DT)
    k_ar = (1 - np.polyfit(u[:-1], u[1:], 1)[0]) / DT
    resid = u[1:] - (1 - k_ar * DT) * u[:-1]
    sig = math.sqrt(np.mean(resid ** 2) / DT)
    nojump = log_likelihood_1d(u, Theta(k_ar, sig, 0.0, 0.0, 0.0), DT)
    lr = 2 * (fit.loglik - nojump)
    assert -1e-6 <= lr < chi2.ppf(0.99, 3)


def test_degenerate_inputs_raise():
    with pytest.raises(FitError):
        fit_single_asset(np.full(400, 0.3), dt=DT)
    with pytest.raises(FitError):
        fit_single_asset(0.2 * (-1.0) ** np.arange(400), dt=DT)
    with pytest.raises(FitError):
        fit_single_asset(np.zeros(50), dt=DT)


@pytest.fixture(scope="module")
def pair():
    th2 = Theta(41.6, 1.52, 30.0, -0.06, 0.38)
    law = JumpLaw("cointegrated", TRUTH.lam, th2.lam, a=0.44)
    u1, u2 = simulate_pair(TRUTH, th2, 0.43, 0.0, law, 1500, DT, seed=12)
    d1, d2 = as_series(u1), as_series(u2)
    return d1, d2, fit_single_asset(d1).theta, fit_single_asset(d2).theta


def test_joint_fit_is_stable_across_start_seeds(pair):
    d1, d2, t1, t2 = pair
    a = fit_joint(d1, d2, t1, t2, "cointegrated", seed=0)
    b = fit_joint(d1, d2, t1, t2, "cointegrated", seed=1)
    assert abs(a.loglik - b.loglik) < 1e-4
    assert a.rho_w == pytest.approx(0.43, abs=0.1)


def test_nested_dependence_kinds_order_the_likelihood(pair):
    d1, d2, t1, t2 = pair
    ind = fit_joint(d1, d2, t1, t2, "independent")
    coint = fit_joint(d1, d2, t1, t2, "cointegrated")
    # a = 0 nests the independent law up to second order in dt
    assert coint.loglik >= ind.loglik - 2.0


def test_identical_series_hit_the_correlation_bound():
    u = simulate_single(TRUTH, 800, DT, seed=4)
    d = as_series(u)
    th = fit_single_asset(d).theta
    res = fit_joint(d, d, th, th, "cointegrated", n_starts=4)
    assert "rho_w_upper" in res.constraint_active
    assert res.rho_w > 0.999


def test_independent_pair_gives_small_diffusion_correlation():
    th2 = Theta(41.6, 1.52, 30.0, -0.06, 0.38)
    law = JumpLaw("independent", TRUTH.lam, th2.lam)
    rhos = []
    for rep in range(3):
        u1, u2 = simulate_pair(TRUTH, th2, 0.0, 0.0, law, 1000, DT, seed=100 + rep)
        d1, d2 = as_series(u1), as_series(u2)
        res = fit_joint(d1, d2, fit_single_asset(d1).theta, fit_single_asset(d2).theta, "cointegrated",
                        n_starts=4, seed=rep)
        rhos.append(res.rho_w)
    assert abs(float(np.median(rhos))) < 0.1


def test_misaligned_dates_are_rejected():
    u = simulate_single(TRUTH, 200, DT, seed=5)
    d1, d2 = as_series(u), as_series(u, START + dt.timedelta(days=1))
    th = Theta(40.0, 1.6, 30.0, 0.0, 0.3)
    with pytest.raises(DomainError):
        fit_joint(d1, d2, th, th, "cointegrated")


def test_price_series_round_trip(tmp_path):
    s = _weekly(40, (0.0, 0.1, 0.1, 0.1, 0.0, -0.2, -0.3))
    s.to_csv(tmp_path / "p.csv", ("synthetic",))
    back = PriceSeries.from_csv(tmp_path / "p.csv")
    assert back.dates == s.dates
    np.testing.assert_allclose(back.prices, s.prices, rtol=1e-9)
