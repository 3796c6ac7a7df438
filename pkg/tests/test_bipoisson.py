import io
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from scipy.stats import chi2, poisson

from cointjump import rng
from cointjump.bipoisson import (DependenceParams, JumpLaw, common_pmf, draw_counts, exact_step_probs, joint_pmf,
                                 joint_pmf_boundary_check, matched_common_intensity, sample_counts, sample_pair,
                                 step_probs, truncation_level)
from cointjump.errors import DomainError, StepSizeError

from oracles import literal_block

intensity = st.floats(0.5, 25.0)
weight = st.floats(0.02, 0.98)


@pytest.mark.parametrize("l1, l2, a", [(0.0, 1.0, 0.5), (1.0, -1.0, 0.5), (1.0, 1.0, 1.2), (1.0, 1.0, -0.1)])
def test_dependence_params_validation(l1, l2, a):
    with pytest.raises(DomainError):
        DependenceParams(l1, l2, a)


def test_jump_law_validation():
    with pytest.raises(DomainError):
        JumpLaw("clayton", 1.0, 1.0)
    with pytest.raises(DomainError):
        JumpLaw("common", 1.0, 2.0, lambda_common=1.5)
    with pytest.raises(DomainError):
        joint_pmf(DependenceParams(1.0, 1.0, 0.5), 0.0)
    with pytest.raises(DomainError):
        truncation_level(5.0, 1e-3)


# small blocks against the literal closed form summed term by term in mpmath
@pytest.mark.parametrize("l1, l2, a, t", [
    (3.0, 2.0, 0.4, 1.0),   # gamma = 0.6
    (2.0, 3.0, 0.7, 1.0),   # gamma < 1, slower N1
    (4.0, 2.0, 0.75, 0.8),  # gamma = 1.5
    (2.0, 2.0, 0.5, 1.5),
    (6.0, 3.0, 0.5, 1.0),   # gamma = 1
])
def test_pmf_matches_literal_formula(l1, l2, a, t):
    got = joint_pmf(DependenceParams(l1, l2, a), t, m_max=5, n_max=5).probs
    want = literal_block(l1, l2, a, t, 6)
    np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-17)


@settings(max_examples=25, deadline=None)
@given(intensity, intensity, weight, st.floats(0.2, 1.5))
def test_pmf_is_a_coupling_of_the_two_poisson_marginals(l1, l2, a, t):
    pmf = joint_pmf(DependenceParams(l1, l2, a), t, tail_tol=1e-12)
    assert pmf.probs.min() >= 0.0
    assert pmf.probs.sum() == pytest.approx(1.0, abs=1e-9)
    np.testing.assert_allclose(pmf.marginal1(), poisson.pmf(np.arange(pmf.m_max + 1), l1 * t), atol=1e-12)
    np.testing.assert_allclose(pmf.marginal2(), poisson.pmf(np.arange(pmf.n_max + 1), l2 * t), atol=1e-12)
    assert 0.0 <= pmf.correlation() <= 1.0


@settings(max_examples=15, deadline=None)
@given(intensity, intensity, weight)
def test_gamma_at_least_one_puts_all_mass_on_or_below_the_diagonal(l1, l2, a):
    assume(a * l1 / l2 >= 1.0)
    P = joint_pmf(DependenceParams(l1, l2, a), 1.0).probs
    assert np.triu(P, 1).max() == 0.0


@settings(max_examples=15, deadline=None)
@given(intensity, intensity)
def test_correlation_increases_with_a(l1, l2):
    rhos = [JumpLaw("cointegrated", l1, l2, a=a).correlation(1.0) for a in (0.0, 0.2, 0.5, 0.8, 1.0)]
    assert rhos[0] == pytest.approx(0.0, abs=1e-12)
    assert all(x < y for x, y in zip(rhos, rhos[1:]))
    # a = 1 is one process on two clocks: corr = sqrt(min/max)
    assert rhos[-1] == pytest.approx(math.sqrt(min(l1, l2) / max(l1, l2)), rel=1e-9)


def test_branches_agree_at_gamma_one():
    assert joint_pmf_boundary_check(DependenceParams(20.0, 10.0, 0.5), 1.0) < 1e-15
    with pytest.raises(DomainError):
        joint_pmf_boundary_check(DependenceParams(20.0, 10.0, 0.4), 1.0)


def test_pmf_is_continuous_across_gamma_one():
    below = joint_pmf(DependenceParams(20.0, 10.0, 0.5 - 1e-7), 1.0, m_max=60, n_max=45).probs
    above = joint_pmf(DependenceParams(20.0, 10.0, 0.5 + 1e-7), 1.0, m_max=60, n_max=45).probs
    assert np.abs(below - above).max() < 1e-5


@settings(max_examples=15, deadline=None)
@given(intensity, intensity, st.floats(0.0, 1.0))
def test_common_pmf_correlation_and_marginals(l1, l2, frac):
    lam = frac * min(l1, l2)
    pmf = common_pmf(l1, l2, lam, 1.0, tail_tol=1e-12)
    assert pmf.correlation() == pytest.approx(lam / math.sqrt(l1 * l2), abs=1e-8)
    np.testing.assert_allclose(pmf.marginal1(), poisson.pmf(np.arange(pmf.m_max + 1), l1), atol=1e-12)
    assert matched_common_intensity(pmf.correlation(), l1, l2) == pytest.approx(lam, abs=1e-7)


@pytest.mark.parametrize("l1, l2, a", [(6.0, 4.0, 0.4), (3.0, 5.0, 0.8), (5.0, 2.0, 0.9)])
def test_sampled_counts_pass_a_pooled_chi_square(l1, l2, a):
    law = JumpLaw("cointegrated", l1, l2, a=a)
    pmf = law.pmf(1.0)
    n = 100_000
    n1, n2 = sample_counts(law, 1.0, n, seed=11)
    observed = np.zeros_like(pmf.probs)
    inside = (n1 <= pmf.m_max) & (n2 <= pmf.n_max)
    np.add.at(observed, (n1[inside], n2[inside]), 1)
    expected = n * pmf.probs
    keep = expected >= 5
    # pool the sparse cells into one bin
    obs = np.append(observed[keep], observed[~keep].sum() + (~inside).sum())
    exp = np.append(expected[keep], n - expected[keep].sum())
    stat = float(((obs - exp) ** 2 / exp).sum())
    assert stat < chi2.ppf(0.999, obs.size - 1)


def test_sample_counts_do_not_depend_on_chunking():
    law = JumpLaw("cointegrated", 8.0, 5.0, a=0.6)
    full = sample_counts(law, 1.0, rng.BLOCK_SIZE + 500, seed=3)
    again = sample_counts(law, 1.0, rng.BLOCK_SIZE + 500, seed=3)
    np.testing.assert_array_equal(full[0], again[0])
    first_block = draw_counts(law, 1.0, rng.BLOCK_SIZE, rng.block_generator(3, 0))
    np.testing.assert_array_equal(full[0][: rng.BLOCK_SIZE], first_block[0])
    np.testing.assert_array_equal(full[1][: rng.BLOCK_SIZE], first_block[1])


def test_event_times_have_the_right_rates():
    gen = rng.block_generator(5, 0)
    params = DependenceParams(30.0, 12.0, 0.6)
    counts = np.array([[p.t1.size, p.t2.size] for p in (sample_pair(params, 1.0, gen) for _ in range(3000))])
    mean = counts.mean(axis=0)
    se = counts.std(axis=0) / math.sqrt(len(counts))
    assert abs(mean[0] - 30.0) < 4 * se[0]
    assert abs(mean[1] - 12.0) < 4 * se[1]
    pair = sample_pair(params, 2.0, gen)
    assert np.all(np.diff(pair.t1) > 0) and pair.t1.max() <= 2.0 and pair.t2.max() <= 2.0


@settings(max_examples=40, deadline=None)
@given(intensity, intensity, weight)
def test_step_probs_are_first_order_exact(l1, l2, a):
    law = JumpLaw("cointegrated", l1, l2, a=a)
    dt = 1e-4
    approx = step_probs(law, dt).as_array()
    exact = exact_step_probs(law.params, dt).as_array()
    assert approx.sum() == pytest.approx(1.0, abs=1e-14)
    assert np.abs(approx - exact).max() <= 2 * (l1 + l2) ** 2 * dt * dt


@pytest.mark.parametrize("law", [JumpLaw("independent", 3.0, 2.0), JumpLaw("common", 3.0, 2.0, lambda_common=1.0),
                                 JumpLaw("cointegrated", 3.0, 2.0, a=0.4)])
def test_step_probs_marginal_rates(law):
    dt = 1e-3
    p = step_probs(law, dt)
    assert (p.p10 + p.p11) / dt == pytest.approx(law.lambda1, rel=1e-2)
    assert (p.p01 + p.p11) / dt == pytest.approx(law.lambda2, rel=1e-2)


def test_step_probs_reject_large_steps():
    with pytest.raises(StepSizeError):
        step_probs(JumpLaw("cointegrated", 95.0, 57.0, a=0.44), 0.02)
    with pytest.raises(DomainError):
        step_probs(JumpLaw("independent", 1.0, 1.0), 0.0)


def test_pmf_csv_lists_every_cell():
    pmf = joint_pmf(DependenceParams(2.0, 3.0, 0.5), 1.0, m_max=4, n_max=3)
    buf = io.StringIO()
    pmf.to_csv(buf, comments=["demo"])
    lines = buf.getvalue().splitlines()
    assert lines[0] == "# demo"
    body = [ln for ln in lines if not ln.startswith("#")]
    assert body[0] == "m,n,prob" and len(body) == 1 + 5 * 4
    m, n, p = body[7].split(",")
    assert float(p) == pmf.probs[int(m), int(n)]
