import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import poisson

from cointjump.errors import DomainError
from cointjump.specfun import (binomial_weight, kummer_m_int, mp_binomial_weights, mp_kummer_poisson_table,
                               mp_poisson_list, poisson_pmf, poisson_weights)

from oracles import kummer_series


@given(st.integers(0, 400), st.floats(0.0, 300.0))
def test_poisson_pmf_matches_scipy(k, alpha):
    want = poisson.pmf(k, alpha)
    assert poisson_pmf(k, alpha) == pytest.approx(want, rel=1e-10, abs=1e-300)


def test_poisson_weights_sum_to_one():
    w = poisson_weights(37.5, 200)
    assert math.fsum(w) == pytest.approx(1.0, abs=1e-14)
    assert poisson_weights(0.0, 3).tolist() == [1.0, 0.0, 0.0, 0.0]


@pytest.mark.parametrize("k, alpha", [(-1, 1.0), (1, -0.5)])
def test_poisson_rejects_negative_inputs(k, alpha):
    with pytest.raises(DomainError):
        poisson_pmf(k, alpha)


@given(st.integers(0, 60), st.floats(0.0, 1.0))
def test_binomial_weights_form_a_distribution(n, a):
    w = [binomial_weight(l, n, a) for l in range(n + 1)]
    assert math.fsum(w) == pytest.approx(1.0, abs=1e-12)
    # weight l counts the (1 - a) factors
    want = [math.comb(n, l) * a ** (n - l) * (1.0 - a) ** l for l in range(n + 1)]
    assert w == pytest.approx(want, rel=1e-9, abs=1e-300)


def test_binomial_weight_edges():
    assert binomial_weight(0, 0, 0.3) == 1.0
    assert binomial_weight(0, 5, 1.0) == 1.0
    assert binomial_weight(5, 5, 0.0) == 1.0
    assert binomial_weight(2, 5, 1.0) == 0.0
    for args in ((3, 2, 0.5), (0, 2, 1.5), (1.5, 2, 0.5), (True, 2, 0.5)):
        with pytest.raises(DomainError):
            binomial_weight(*args)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 60), st.integers(0, 60), st.floats(0.0, 500.0))
def test_kummer_matches_high_precision_series(a, extra, x):
    b = a + extra
    got = kummer_m_int(a, b, x)
    want = kummer_series(a, b, x)
    assert abs(got - float(want)) <= 1e-13 * float(want)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 30), st.integers(0, 30), st.floats(0.01, 200.0))
def test_kummer_contiguous_relation(a, extra, x):
    # b M(a;b;x) - b M(a-1;b;x) - x M(a;b+1;x) = 0, with M(0;b;x) = 1
    b = a + 1 + extra
    lower = kummer_m_int(a - 1, b, x) if a > 1 else 1.0
    lhs = b * kummer_m_int(a, b, x) - b * lower
    rhs = x * kummer_m_int(a, b + 1, x)
    assert lhs == pytest.approx(rhs, rel=1e-11)


def test_kummer_special_values():
    assert kummer_m_int(3, 3, 2.5) == pytest.approx(math.exp(2.5), rel=1e-15)
    assert kummer_m_int(4, 9, 0.0) == 1.0
    # M(1; 2; x) = (e^x - 1) / x
    assert kummer_m_int(1, 2, 7.0) == pytest.approx(math.expm1(7.0) / 7.0, rel=1e-14)


@pytest.mark.parametrize("a, b, x", [(0, 3, 1.0), (4, 3, 1.0), (1, 2, -1.0), (1, 2, 501.0), (1.5, 3, 1.0)])
def test_kummer_domain(a, b, x):
    with pytest.raises(DomainError):
        kummer_m_int(a, b, x)


def test_multiprecision_helpers_agree_with_float_versions():
    p = mp_poisson_list(12.5, 40)
    assert [float(v) for v in p] == pytest.approx(poisson_weights(12.5, 40).tolist(), rel=1e-13)
    w = mp_binomial_weights(7, 0.3)
    assert [float(v) for v in w] == pytest.approx([binomial_weight(l, 7, 0.3) for l in range(8)], rel=1e-13)


def test_kummer_poisson_table_entries():
    x = 6.0
    T = mp_kummer_poisson_table(x, 8, 10)
    with mpmath.workdps(40):
        for A in range(0, 9):
            for B in range(max(A, 1), 11):
                want = mpmath.e ** (-x) * mpmath.mpf(x) ** (B - 1) / mpmath.factorial(B - 1) * mpmath.hyp1f1(A, B, x)
                assert float(T[A][B]) == pytest.approx(float(want), rel=1e-15)
    np.testing.assert_allclose(float(T[3][4]), float(T[2][4]) + float(T[3][5]), rtol=1e-15)
