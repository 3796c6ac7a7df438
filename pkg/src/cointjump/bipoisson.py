"""Dependent bivariate Poisson processes.

Construction: draw i.i.d. ``Y_k, Z_k ~ Exp(lambda2)`` and ``B_k ~ Bernoulli``
with ``P{B = 0} = a``, put ``X_k = a Y_k + B_k Z_k`` (again ``Exp(lambda2)``,
since the exponential law is self-decomposable). N1 counts the points
``(lambda2/lambda1) * sum Y_k`` and N2 counts ``sum X_k``. With
``gamma = a lambda1 / lambda2 >= 1`` every N2 point trails the N1 point
with the same index, so ``N2(t) <= N1(t)``.

The exact law of ``(N1(t), N2(t))`` is a finite alternating series. It is
evaluated here in multiprecision floating point, with the working precision
chosen from a running bound on the magnitude of the summed terms, then
rounded to float64.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import IO, Literal

import gmpy2
import numpy as np
from gmpy2 import mpfr
from scipy.stats import poisson

from . import rng as _rng
from .errors import DomainError, InstabilityError, NumericalError, StepSizeError
from .specfun import (
    mp_binomial_weights,
    mp_kummer_poisson_table,
    mp_poisson_list,
    poisson_weights,
)

Kind = Literal["independent", "common", "cointegrated"]
KINDS: tuple[str, ...] = ("independent", "common", "cointegrated")

DEFAULT_TAIL_TOL = 1e-10
CLIP_FLOOR = -1e-6
# absolute accuracy demanded of every multiprecision entry before rounding
_ENTRY_ACCURACY = 1e-20


@dataclass(frozen=True)
class DependenceParams:
    """Intensities of N1 and N2 and the self-decomposability weight ``a``.

    ``a = 0`` (independent processes) and ``a = 1`` (one process observed on
    two clocks) are accepted as limits and handled by dedicated code.
    """

    lambda1: float
    lambda2: float
    a: float

    def __post_init__(self):
        if not (self.lambda1 > 0 and self.lambda2 > 0):
            raise DomainError("intensities must be positive")
        if not 0.0 <= self.a <= 1.0:
            raise DomainError(f"a must lie in [0, 1], got {self.a}")

    @property
    def gamma(self) -> float:
        return self.a * self.lambda1 / self.lambda2


@dataclass(frozen=True)
class JumpLaw:
    """A joint law for two counting processes, of one of three kinds.

    ``a`` is used by the cointegrated kind, ``lambda_common`` by the common
    kind (N_i = N + N_i^X with a shared Poisson N of that intensity).
    Intensities may be zero; a zero-intensity process never jumps.
    """

    kind: str
    lambda1: float
    lambda2: float
    a: float = 0.0
    lambda_common: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown dependence kind {self.kind!r}; expected one of {KINDS}")
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise DomainError("intensities must be nonnegative")
        if self.kind == "cointegrated" and not 0.0 <= self.a <= 1.0:
            raise DomainError(f"a must lie in [0, 1], got {self.a}")
        if self.kind == "common":
            if self.lambda_common < 0:
                raise DomainError("common intensity must be nonnegative")
            if self.lambda_common > min(self.lambda1, self.lambda2) * (1 + 1e-12):
                raise DomainError(
                    f"common intensity {self.lambda_common} exceeds min(lambda1, lambda2) = "
                    f"{min(self.lambda1, self.lambda2)}"
                )

    @property
    def params(self) -> DependenceParams:
        return DependenceParams(self.lambda1, self.lambda2, self.a)

    def pmf(self, t: float, tail_tol: float = DEFAULT_TAIL_TOL, m_max: int | None = None,
            n_max: int | None = None) -> JointPmf:
        if self.kind == "cointegrated" and self.lambda1 > 0 and self.lambda2 > 0:
            return joint_pmf(self.params, t, tail_tol, m_max=m_max, n_max=n_max)
        lam = self.lambda_common if self.kind == "common" else 0.0
        return common_pmf(self.lambda1, self.lambda2, lam, t, tail_tol, m_max=m_max, n_max=n_max)

    def step_probs(self, dt: float) -> StepProbs:
        return step_probs(self, dt)

    def correlation(self, t: float, tail_tol: float = DEFAULT_TAIL_TOL) -> float:
        if self.kind == "independent":
            return 0.0
        if self.kind == "common":
            if self.lambda1 == 0 or self.lambda2 == 0:
                return 0.0
            return common_jump_correlation(self.lambda_common, self.lambda1, self.lambda2)
        return self.pmf(t, tail_tol).correlation()

    def sample_counts(self, t: float, n_paths: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
        return sample_counts(self, t, n_paths, seed)


@dataclass(frozen=True)
class JointPmf:
    """Truncated matrix ``probs[m, n] = P{N1(t) = m, N2(t) = n}``.

    ``tail_mass`` bounds the excluded probability from above: it is the sum
    of the two marginal Poisson tails beyond the truncation.
    """

    t: float
    m_max: int
    n_max: int
    probs: np.ndarray
    tail_mass: float
    law: JumpLaw | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.probs.shape != (self.m_max + 1, self.n_max + 1):
            raise ValueError("probs shape does not match truncation")
        self.probs.setflags(write=False)

    def marginal1(self) -> np.ndarray:
        return self.probs.sum(axis=1)

    def marginal2(self) -> np.ndarray:
        return self.probs.sum(axis=0)

    def correlation(self) -> float:
        m = np.arange(self.m_max + 1, dtype=float)
        n = np.arange(self.n_max + 1, dtype=float)
        p1, p2 = self.marginal1(), self.marginal2()
        e1, e2 = p1 @ m, p2 @ n
        v1 = p1 @ (m * m) - e1 * e1
        v2 = p2 @ (n * n) - e2 * e2
        if v1 <= 0 or v2 <= 0:
            return 0.0
        cov = m @ self.probs @ n - e1 * e2
        return float(np.clip(cov / math.sqrt(v1 * v2), -1.0, 1.0))

    def to_csv(self, fh: IO[str], comments: list[str] | tuple[str, ...] = ()) -> None:
        """Write ``m,n,prob`` rows in m-major order, after ``#`` comment lines."""
        for line in comments:
            fh.write(f"# {line}\n")
        fh.write(f"# t={float(self.t)!r}\n# tail_mass={float(self.tail_mass)!r}\n")
        fh.write("m,n,prob\n")
        for m in range(self.m_max + 1):
            row = self.probs[m]
            for n in range(self.n_max + 1):
                fh.write(f"{m},{n},{float(row[n])!r}\n")


@dataclass(frozen=True)
class EventTimePair:
    """Arrival times of N1 (``t1``) and N2 (``t2``) up to ``horizon``."""

    t1: np.ndarray
    t2: np.ndarray
    horizon: float


@dataclass(frozen=True)
class StepProbs:
    """Joint law of the two jump indicators over one time step."""

    p00: float
    p01: float
    p10: float
    p11: float

    def __post_init__(self):
        total = self.p00 + self.p01 + self.p10 + self.p11
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"step probabilities sum to {total}")

    def as_array(self) -> np.ndarray:
        """Weights in (no jump, only N2, only N1, both) order."""
        return np.array([self.p00, self.p01, self.p10, self.p11])


# ---- truncation --------------------------------------------------------------

def truncation_level(mean: float, tail_tol: float = DEFAULT_TAIL_TOL) -> int:
    """ceil(mean + 10 sqrt(mean)) + 10, raised further if the Poisson tail is still >= tail_tol."""
    if not 0 < tail_tol <= 1e-4:
        raise DomainError(f"tail_tol must lie in (0, 1e-4], got {tail_tol}")
    k = math.ceil(mean + 10.0 * math.sqrt(mean)) + 10
    if mean > 0:
        while poisson.sf(k, mean) >= tail_tol:
            k += max(1, int(math.sqrt(mean)))
    return k


def _tail_mass(mean1: float, mean2: float, m_max: int, n_max: int) -> float:
    return float(poisson.sf(m_max, mean1) + poisson.sf(n_max, mean2))


# ---- exact cointegrated law ----------------------------------------------------

def _q_branch(l1: float, l2: float, a: float, t: float, m_max: int, n_max: int):
    """gamma >= 1. Returns the pmf as nested mpfr lists and a bound on summed magnitudes.

    Q_{m,0} = pi_m(l1 t) and for n >= 1
    Q_{m,n} = sum_{j=n}^m (-1)^(n+j) C(j-1,n-1) a^-j pi_{m-j}(l1 t) S_{j,n},
    S_{j,n} = sum_{l<=n} beta_l(n) T[j+1][j+l+1](l2 t).
    """
    a_ = mpfr(a)
    nq = min(m_max, n_max + 1)
    pim = mp_poisson_list(mpfr(l1) * t, m_max)
    table = mp_kummer_poisson_table(mpfr(l2) * t, m_max + 1, m_max + nq + 1)
    betas = [mp_binomial_weights(n, a_) for n in range(nq + 1)]
    inv_a_pow = [mpfr(1)]
    for _ in range(m_max):
        inv_a_pow.append(inv_a_pow[-1] / a_)
    S = []
    for j in range(m_max + 1):
        row_t = table[j + 1]
        S.append([sum((bl * row_t[j + l + 1] for l, bl in enumerate(betas[n])), mpfr(0))
                  for n in range(min(j, nq) + 1)])
    scale = 0.0
    Q = []
    for m in range(m_max + 1):
        q_row = [pim[m]]
        for n in range(1, min(m, nq) + 1):
            acc = mpfr(0)
            mag = mpfr(0)
            binom = 1  # C(j-1, n-1) starting at j = n
            for j in range(n, m + 1):
                term = binom * inv_a_pow[j] * pim[m - j] * S[j][n]
                acc = acc - term if (n + j) & 1 else acc + term
                mag += term
                binom = binom * j // (j - n + 1)
            q_row.append(acc)
            scale = max(scale, float(mag))
        Q.append(q_row)
    out = []
    for m in range(m_max + 1):
        row = []
        for n in range(n_max + 1):
            if n > m:
                row.append(None)
            elif n == m:
                row.append(Q[m][n])
            else:
                row.append(Q[m][n] - Q[m][n + 1])
        out.append(row)
    return out, max(scale, 1.0)


def _abc_branch(l1: float, l2: float, a: float, t: float, m_max: int, n_max: int):
    """gamma <= 1 (and 0 < a < 1). Same return convention as :func:`_q_branch`."""
    a_ = mpfr(a)
    one_minus_a = 1 - a_
    t_ = mpfr(t)
    mu, lam = mpfr(l1), mpfr(l2)
    w = lam * t_ - a_ * mu * t_
    if w < 0:  # rounding at the gamma = 1 boundary
        w = mpfr(0)
    nq = n_max + 1
    pim = mp_poisson_list(mu * t_, m_max)
    pil = mp_poisson_list(lam * t_, nq)
    piw = mp_poisson_list(w, nq)
    betas = [mp_binomial_weights(n, a_) for n in range(nq + 2)]

    # A_{m,n} = pi_m(l1 t) sum_k beta_k(n) P{Pois(w) >= k}
    survival, cum = [], mpfr(0)
    for k in range(nq + 1):
        survival.append(1 - cum)
        cum += piw[k]
    a_coef = [sum((betas[n][k] * survival[k] for k in range(n + 1)), mpfr(0)) for n in range(nq + 1)]

    # B_{m,n} = pi_m(l1 t) e^-w sum_{k<=n-m} (1-a)^-k G_{k,n},
    # G_{k,n} = sum_l beta_l(n+1) (a/(1-a))^l T[l][k+l+1](z), z = (1-a) w / a
    z = one_minus_a * w / a_
    tz = mp_kummer_poisson_table(z, n_max + 2, 2 * n_max + 3)
    ratio = a_ / one_minus_a
    ratio_pow = [mpfr(1)]
    for _ in range(n_max + 2):
        ratio_pow.append(ratio_pow[-1] * ratio)
    inv_1ma = 1 / one_minus_a
    b_cum = []
    for n in range(n_max + 1):
        weights = [bl * ratio_pow[l] for l, bl in enumerate(betas[n + 1])]
        acc, fk, row = mpfr(0), mpfr(1), []
        for k in range(n + 1):
            g = mpfr(0)
            for l, wl in enumerate(weights):
                g += wl * tz[l][k + l + 1]
            acc += fk * g
            fk *= inv_1ma
            row.append(acc)
        b_cum.append(row)
    e_w = gmpy2.exp(-w)

    def b_val(m, n):
        return pim[m] * e_w * b_cum[n][n - m]

    # C_{m,n} = e^{-(1-a) l1 t} a^-m sum_{r=1}^n (-1)^(r-1) U_{m,n,r} V_{n,r}, C_{m,0} = 0
    # U_{m,n,r} = sum_{k=n}^m C(k+r-1,k) T[k+r][m+r+1](a l1 t)
    # V_{n,r} = sum_{l=r}^n beta_l(n) pi_{l-r}(l2 t)
    rmax = min(m_max, nq)
    ty = mp_kummer_poisson_table(a_ * mu * t_, m_max + rmax, m_max + rmax + 1)
    V = [[mpfr(0)] * (nq + 1) for _ in range(nq + 1)]
    for n in range(1, nq + 1):
        for r in range(1, n + 1):
            V[n][r] = sum((betas[n][l] * pil[l - r] for l in range(r, n + 1)), mpfr(0))
    binom = [None] + [[mpfr(math.comb(k + r - 1, k)) for k in range(m_max + 1)] for r in range(1, rmax + 1)]
    pref = gmpy2.exp(-one_minus_a * mu * t_)
    inv_a = 1 / a_
    scale = 0.0
    C = []
    am = pref
    for m in range(m_max + 1):
        top = min(m, nq)
        suffix = [None] * (top + 1)
        for r in range(1, top + 1):
            col = [mpfr(0)] * (m + 2)
            br, t_row_base = binom[r], m + r + 1
            for k in range(m, 0, -1):
                col[k] = col[k + 1] + br[k] * ty[k + r][t_row_base]
            suffix[r] = col
        c_row = [mpfr(0)]
        for n in range(1, top + 1):
            acc, mag = mpfr(0), mpfr(0)
            for r in range(1, n + 1):
                term = suffix[r][n] * V[n][r]
                acc = acc + term if r & 1 else acc - term
                mag += term
            c_row.append(am * acc)
            scale = max(scale, float(am * mag))
        C.append(c_row)
        am *= inv_a

    out = []
    for m in range(m_max + 1):
        row = []
        for n in range(n_max + 1):
            base = pim[m] * (a_coef[n] - a_coef[n + 1])
            if n > m:
                b_hi, b_lo = b_val(m, n), b_val(m, n - 1)
                scale = max(scale, float(b_hi))
                row.append(base + b_hi - b_lo)
            elif n == m:
                row.append(base + b_val(n, n) + C[n][n])
            else:
                row.append(base + C[m][n] - C[m][n + 1])
        out.append(row)
    return out, max(scale, 1.0)


def _to_float_matrix(entries, m_max: int, n_max: int) -> np.ndarray:
    P = np.zeros((m_max + 1, n_max + 1))
    for m, row in enumerate(entries):
        for n, v in enumerate(row):
            if v is not None:
                P[m, n] = float(v)
    return P


def _exact_matrix(l1: float, l2: float, a: float, t: float, m_max: int, n_max: int,
                  branch: str) -> np.ndarray:
    evaluate = _q_branch if branch == "upper" else _abc_branch
    n_ops = m_max + n_max + 10
    prec = 128 + m_max
    for _ in range(5):
        with gmpy2.context(gmpy2.get_context(), precision=prec):
            entries, scale = evaluate(l1, l2, a, t, m_max, n_max)
            rounding = scale * n_ops * 2.0 ** (-prec)
            if rounding < _ENTRY_ACCURACY:
                return _to_float_matrix(entries, m_max, n_max)
        prec = int(math.log2(scale * n_ops / _ENTRY_ACCURACY)) + 32
    raise NumericalError("could not reach the target accuracy by raising the working precision")


def _degenerate_matrix(l1: float, l2: float, a: float, t: float, m_max: int, n_max: int) -> np.ndarray:
    if a == 0.0:
        return np.outer(poisson_weights(l1 * t, m_max), poisson_weights(l2 * t, n_max))
    # a = 1: N2 runs on the N1 clock rescaled by l2/l1; the faster one is the
    # slower one plus an independent Poisson increment
    if l1 >= l2:
        lo = poisson_weights(l2 * t, n_max)
        extra = poisson_weights((l1 - l2) * t, m_max)
        P = np.zeros((m_max + 1, n_max + 1))
        for n in range(min(m_max, n_max) + 1):
            P[n:, n] = lo[n] * extra[: m_max + 1 - n]
        return P
    return _degenerate_matrix(l2, l1, 1.0, t, n_max, m_max).T


def _finish(P: np.ndarray, t: float, mean1: float, mean2: float, law: JumpLaw | None) -> JointPmf:
    low = P.min()
    if low < CLIP_FLOOR:
        cell = np.unravel_index(int(P.argmin()), P.shape)
        raise InstabilityError(f"joint pmf entry {low:.3e} below {CLIP_FLOOR}", (int(cell[0]), int(cell[1])))
    np.clip(P, 0.0, 1.0, out=P)
    m_max, n_max = P.shape[0] - 1, P.shape[1] - 1
    return JointPmf(t, m_max, n_max, P, _tail_mass(mean1, mean2, m_max, n_max), law)


def joint_pmf(params: DependenceParams, t: float, tail_tol: float = DEFAULT_TAIL_TOL,
              m_max: int | None = None, n_max: int | None = None,
              branch: str | None = None) -> JointPmf:
    """Exact joint law of ``(N1(t), N2(t))`` for the cointegrated construction.

    ``branch`` forces ``"upper"`` (gamma >= 1 series) or ``"lower"``
    (gamma <= 1 series); by default it follows gamma.
    """
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    l1, l2, a = params.lambda1, params.lambda2, params.a
    m_max = truncation_level(l1 * t, tail_tol) if m_max is None else int(m_max)
    n_max = truncation_level(l2 * t, tail_tol) if n_max is None else int(n_max)
    law = JumpLaw("cointegrated", l1, l2, a=a)
    if a in (0.0, 1.0):
        P = _degenerate_matrix(l1, l2, a, t, m_max, n_max)
    else:
        if branch is None:
            branch = "upper" if params.gamma >= 1.0 else "lower"
        elif branch not in ("upper", "lower"):
            raise DomainError(f"unknown branch {branch!r}")
        P = _exact_matrix(l1, l2, a, t, m_max, n_max, branch)
    return _finish(P, t, l1 * t, l2 * t, law)


def joint_pmf_boundary_check(params: DependenceParams, t: float, tail_tol: float = DEFAULT_TAIL_TOL) -> float:
    """Max absolute entry difference between the two series at gamma = 1."""
    if abs(params.gamma - 1.0) > 1e-12:
        raise DomainError(f"boundary check needs gamma = 1, got {params.gamma}")
    upper = joint_pmf(params, t, tail_tol, branch="upper")
    lower = joint_pmf(params, t, tail_tol, m_max=upper.m_max, n_max=upper.n_max, branch="lower")
    return float(np.abs(upper.probs - lower.probs).max())


def common_pmf(lambda1: float, lambda2: float, lambda_common: float, t: float,
               tail_tol: float = DEFAULT_TAIL_TOL, m_max: int | None = None,
               n_max: int | None = None) -> JointPmf:
    """Law of ``(N + N1^X, N + N2^X)``; ``lambda_common = 0`` gives independent processes."""
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    law = JumpLaw("common" if lambda_common > 0 else "independent", lambda1, lambda2,
                  lambda_common=lambda_common)
    m_max = truncation_level(lambda1 * t, tail_tol) if m_max is None else int(m_max)
    n_max = truncation_level(lambda2 * t, tail_tol) if n_max is None else int(n_max)
    p1 = poisson_weights((lambda1 - lambda_common) * t, m_max)
    p2 = poisson_weights((lambda2 - lambda_common) * t, n_max)
    if lambda_common == 0:
        P = np.outer(p1, p2)
    else:
        pc = poisson_weights(lambda_common * t, min(m_max, n_max))
        P = np.zeros((m_max + 1, n_max + 1))
        for c, w in enumerate(pc):
            P[c:, c:] += w * np.outer(p1[: m_max + 1 - c], p2[: n_max + 1 - c])
    return _finish(P, t, lambda1 * t, lambda2 * t, law)


def poisson_correlation(params: DependenceParams, t: float, tail_tol: float = DEFAULT_TAIL_TOL) -> float:
    """Corr[N1(t), N2(t)] from the moments of the exact joint law."""
    return joint_pmf(params, t, tail_tol).correlation()


def common_jump_correlation(lambda_common: float, lambda1: float, lambda2: float) -> float:
    if lambda_common < 0 or lambda1 <= 0 or lambda2 <= 0:
        raise DomainError("need lambda_common >= 0 and positive marginal intensities")
    if lambda_common > min(lambda1, lambda2) * (1 + 1e-12):
        raise DomainError("common intensity cannot exceed a marginal intensity")
    return lambda_common / math.sqrt(lambda1 * lambda2)


def matched_common_intensity(rho: float, lambda1: float, lambda2: float) -> float:
    """Common intensity giving count correlation ``rho``."""
    return rho * math.sqrt(lambda1 * lambda2)


# ---- first arrivals and one-step laws ---------------------------------------------

def joint_cdf_exponential(x1: float, x2: float, params: DependenceParams) -> float:
    """P{X1 <= x1, X2 <= x2} for the first inter-arrival times of N1 and N2.

    X2 = gamma X1 + B Z, which gives a closed form split at x1 ^ (x2 / gamma).
    """
    l1, l2, g = params.lambda1, params.lambda2, params.gamma
    if x1 <= 0 or x2 <= 0:
        return 0.0
    s = min(x1, x2 / g) if g > 0 else x1
    return float(-math.expm1(-l1 * s) + math.exp(-l2 * x2) * math.expm1(-(l1 - g * l2) * s))


def exact_step_probs(params: DependenceParams, dt: float) -> StepProbs:
    """One-step probabilities from the first-arrival joint cdf (at most one jump each)."""
    h = joint_cdf_exponential(dt, dt, params)
    p10 = -math.expm1(-params.lambda1 * dt) - h
    p01 = -math.expm1(-params.lambda2 * dt) - h
    return StepProbs(1.0 - h - p10 - p01, p01, p10, h)


def step_probs(law: JumpLaw, dt: float) -> StepProbs:
    """First-order joint law of the two jump indicators over ``dt``."""
    if not dt > 0:
        raise DomainError(f"dt must be positive, got {dt}")
    l1, l2 = law.lambda1, law.lambda2
    if law.kind == "independent":
        p10 = l1 * dt * (1 - l2 * dt)
        p01 = (1 - l1 * dt) * l2 * dt
        p11 = l1 * dt * l2 * dt
    elif law.kind == "common":
        lam = law.lambda_common
        p10, p01, p11 = (l1 - lam) * dt, (l2 - lam) * dt, lam * dt
    else:
        g = law.a * l1 / l2 if l2 > 0 else 0.0
        if g > 1:
            p10 = (l1 - l2) * dt - l1 * (l1 / g - l2) * dt * dt
            p01, p11 = 0.0, l2 * dt
        else:
            p10, p01, p11 = (l1 - g * l2) * dt, l2 * (1 - g) * dt, g * l2 * dt
    p00 = 1.0 - p10 - p01 - p11
    for name, p in (("p00", p00), ("p01", p01), ("p10", p10), ("p11", p11)):
        if not -1e-15 <= p <= 1.0:
            raise StepSizeError(f"{name} = {p:.6g} is not a probability; dt = {dt} is too large")
    p01, p10, p11 = (min(max(p, 0.0), 1.0) for p in (p01, p10, p11))
    return StepProbs(1.0 - p10 - p01 - p11, p01, p10, p11)


# ---- sampling -------------------------------------------------------------------

def _draw_exponentials(gen: np.random.Generator, scale: float, size) -> np.ndarray:
    # inverse cdf on the open interval
    return -scale * np.log1p(-gen.random(size))


def sample_pair(params: DependenceParams, horizon: float, gen: np.random.Generator) -> EventTimePair:
    """Arrival times of N1 and N2 on ``[0, horizon]`` from one exclusively owned generator."""
    if not horizon > 0:
        raise DomainError(f"horizon must be positive, got {horizon}")
    l1, l2, a = params.lambda1, params.lambda2, params.a
    s_pts, t_pts = [], []
    s_last = t_last = 0.0
    batch = max(16, int(max(l1, l2) * horizon * 1.2) + 16)
    while s_last <= horizon or t_last <= horizon:
        y = _draw_exponentials(gen, 1.0 / l2, batch)
        z = _draw_exponentials(gen, 1.0 / l2, batch)
        b = gen.random(batch) >= a  # P{B = 0} = a
        x = a * y + b * z
        s_new = s_last + np.cumsum(y) * (l2 / l1)
        t_new = t_last + np.cumsum(x)
        s_pts.append(s_new)
        t_pts.append(t_new)
        s_last, t_last = s_new[-1], t_new[-1]
    s_all = np.concatenate(s_pts)
    t_all = np.concatenate(t_pts)
    return EventTimePair(s_all[s_all <= horizon], t_all[t_all <= horizon], horizon)


def _cointegrated_counts(params: DependenceParams, t: float, size: int, gen: np.random.Generator):
    l1, l2, a = params.lambda1, params.lambda2, params.a
    lead = max(l1, l2) * t
    width = math.ceil(lead + 8 * math.sqrt(lead)) + 8
    n1 = np.zeros(size, dtype=np.int64)
    n2 = np.zeros(size, dtype=np.int64)
    s0 = np.zeros(size)
    t0 = np.zeros(size)
    active = np.arange(size)
    while active.size:
        k = active.size
        y = _draw_exponentials(gen, 1.0 / l2, (k, width))
        z = _draw_exponentials(gen, 1.0 / l2, (k, width))
        b = gen.random((k, width)) >= a
        s = s0[active, None] + np.cumsum(y, axis=1) * (l2 / l1)
        x = t0[active, None] + np.cumsum(a * y + b * z, axis=1)
        n1[active] += (s <= t).sum(axis=1)
        n2[active] += (x <= t).sum(axis=1)
        s0[active], t0[active] = s[:, -1], x[:, -1]
        active = active[(s[:, -1] <= t) | (x[:, -1] <= t)]
        width = max(8, width // 4)
    return n1, n2


def sample_counts(law: JumpLaw, t: float, n_paths: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Draws of ``(N1(t), N2(t))`` from per-block counter-based streams."""
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    n1 = np.empty(n_paths, dtype=np.int64)
    n2 = np.empty(n_paths, dtype=np.int64)
    for start, size, gen in _rng.blocks(seed, n_paths):
        sl = slice(start, start + size)
        n1[sl], n2[sl] = draw_counts(law, t, size, gen)
    return n1, n2


def draw_counts(law: JumpLaw, t: float, size: int, gen: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """``size`` draws of ``(N1(t), N2(t))`` from one generator."""
    if law.kind == "cointegrated" and law.lambda1 > 0 and law.lambda2 > 0:
        return _cointegrated_counts(law.params, t, size, gen)
    lam = law.lambda_common if law.kind == "common" else 0.0
    shared = gen.poisson(lam * t, size)
    return (shared + gen.poisson((law.lambda1 - lam) * t, size),
            shared + gen.poisson((law.lambda2 - lam) * t, size))
