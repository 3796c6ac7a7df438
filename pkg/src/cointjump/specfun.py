"""Poisson and binomial weights and integer-parameter Kummer functions.

The float routines work in log space and exponentiate last. The ``mp_*``
routines return lists of gmpy2 ``mpfr`` values at the precision of the
active gmpy2 context; the joint-pmf engine in :mod:`cointjump.bipoisson`
uses them.
"""
from __future__ import annotations

import math
import numbers

import gmpy2
import numpy as np
from gmpy2 import mpfr
from scipy.special import gammaln

from .errors import DomainError

KUMMER_X_MAX = 500.0


def _check_int(name: str, value, minimum: int) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise DomainError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise DomainError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def log_poisson_pmf(k, alpha):
    """log pi_k(alpha), elementwise. alpha = 0 gives 0 at k = 0 and -inf elsewhere."""
    k = np.asarray(k)
    alpha = np.asarray(alpha, dtype=float)
    if np.any(alpha < 0):
        raise DomainError("Poisson mean must be nonnegative")
    if np.any(k < 0):
        raise DomainError("Poisson count must be nonnegative")
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(
            alpha > 0,
            k * np.log(np.where(alpha > 0, alpha, 1.0)) - alpha - gammaln(k + 1.0),
            np.where(k == 0, 0.0, -np.inf),
        )
    return out[()] if out.ndim == 0 else out


def poisson_pmf(k, alpha):
    """pi_k(alpha) = e^-alpha alpha^k / k!, elementwise."""
    out = np.exp(log_poisson_pmf(k, alpha))
    return out[()] if np.ndim(out) == 0 else out


def poisson_weights(alpha: float, kmax: int) -> np.ndarray:
    """Vector (pi_0(alpha), ..., pi_kmax(alpha))."""
    return np.asarray(poisson_pmf(np.arange(kmax + 1), alpha), dtype=float)


def log_binomial_weight(l: int, n: int, a: float) -> float:
    l = _check_int("l", l, 0)
    n = _check_int("n", n, 0)
    if l > n:
        raise DomainError(f"binomial index l={l} exceeds n={n}")
    if not 0.0 <= a <= 1.0:
        raise DomainError(f"binomial weight parameter must lie in [0, 1], got {a}")
    out = math.lgamma(n + 1) - math.lgamma(l + 1) - math.lgamma(n - l + 1)
    # 0 * log(0) counts as 0, which also gives beta_0(0) = 1
    for power, base in ((n - l, a), (l, 1.0 - a)):
        if power:
            if base == 0.0:
                return -math.inf
            out += power * math.log(base)
    return out


def binomial_weight(l: int, n: int, a: float) -> float:
    """C(n, l) a^(n-l) (1-a)^l."""
    return math.exp(log_binomial_weight(l, n, a))


def kummer_m_int(a: int, b: int, x: float) -> float:
    """Confluent hypergeometric M(a; b; x) for integers 1 <= a <= b and 0 <= x <= 500.

    Forward series summed until the next term is below 1e-16 of the running
    sum and terms are decreasing. All terms are positive, so no cancellation.
    """
    a = _check_int("a", a, 1)
    b = _check_int("b", b, 1)
    if a > b:
        raise DomainError(f"need a <= b, got a={a}, b={b}")
    x = float(x)
    if not 0.0 <= x <= KUMMER_X_MAX:
        raise DomainError(f"x must lie in [0, {KUMMER_X_MAX}], got {x}")
    if x == 0.0:
        return 1.0
    if a == b:
        return math.exp(x)
    # the term ratio decreases in j, so once below 1 the tail is geometric
    terms = [1.0]
    term, running, j = 1.0, 1.0, 0
    while True:
        ratio = (a + j) * x / ((b + j) * (j + 1))
        term *= ratio
        j += 1
        terms.append(term)
        running += term
        if ratio < 1.0 and term / (1.0 - ratio) < 1e-17 * running:
            break
    return math.fsum(terms)


# ---- multiprecision helpers -------------------------------------------------

def mp_poisson_list(x, kmax: int) -> list:
    """[pi_0(x), ..., pi_kmax(x)] as mpfr."""
    x = mpfr(x)
    p = gmpy2.exp(-x)
    out = [p]
    for k in range(1, kmax + 1):
        p = p * x / k
        out.append(p)
    return out


def mp_binomial_weights(n: int, a) -> list:
    """[beta_0(n), ..., beta_n(n)] with beta_l(n) = C(n,l) a^(n-l) (1-a)^l, as mpfr."""
    a = mpfr(a)
    b = 1 - a
    return [gmpy2.comb(n, l) * a ** (n - l) * b ** l for l in range(n + 1)]


def mp_kummer_poisson_table(x, a_max: int, b_max: int) -> list[list]:
    """Table ``T[A][B] = pi_{B-1}(x) * M(A; B; x)`` for 0 <= A <= a_max, 1 <= B <= b_max + 1.

    Expanding the Kummer series gives ``T[A][B] = sum_i C(A-1+i, i) pi_{B-1+i}(x)``,
    a sum of positive terms obeying ``T[A][B] = T[A-1][B] + T[A][B+1]`` with
    ``T[0][B] = pi_{B-1}(x)`` (M(0; B; x) = 1). The last column is summed
    directly and the recurrence fills the rest, so nothing cancels. Note that
    the table is also defined for A > B, where the series still converges.
    """
    x = mpfr(x)
    top = b_max + 1
    pis = mp_poisson_list(x, top)
    zero = mpfr(0)
    table = [[zero] * (top + 1) for _ in range(a_max + 1)]
    for B in range(1, top + 1):
        table[0][B] = pis[B - 1]
    eps = mpfr(2) ** (-gmpy2.get_context().precision - 8)
    for A in range(1, a_max + 1):
        row, prev = table[A], table[A - 1]
        term = pis[top - 1]
        total = zero
        i = 0
        while term > 0:
            total += term
            ratio = (A + i) * x / ((i + 1) * (top + i))
            term = term * ratio
            i += 1
            if ratio < 1 and term < eps * total:
                break
        row[top] = total
        for B in range(top - 1, 0, -1):
            row[B] = prev[B] + row[B + 1]
    return table
