"""Option values by conditioning on jump counts, plus a Monte Carlo cross-check.

Given the jump counts every model price is lognormal, so a vanilla or
zero-strike spread value is a probability-weighted sum of Black-Scholes or
Margrabe terms. Only the weights depend on how the two jump counters are
coupled.
"""
from __future__ import annotations

import datetime as dt
import math
from collections import OrderedDict
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy.special import ndtr
from scipy.stats import poisson

from . import rng as _rng
from .bipoisson import (
    DEFAULT_TAIL_TOL,
    JointPmf,
    JumpLaw,
    draw_counts,
    matched_common_intensity,
    truncation_level,
)
from .errors import DomainError, TruncationError
from .models import (
    DAY_COUNT,
    Coupling,
    GouLeg,
    GouMarket,
    MertonLeg,
    MertonMarket,
    SSMarket,
    diffusion_covariance,
    gou_a,
    gou_b,
    gou_effective_spot,
    gou_terminal_variance,
    jump_correlation,
    leg_variances,
    merton_effective_spot,
    merton_terminal_variance,
    ou_variance,
    ss_a,
    ss_b_from_pmf,
    ss_effective_spot,
    ss_terminal_variance,
)
from .specfun import poisson_weights

_EPS = np.finfo(float).eps
DEFAULT_MAX_ERROR = 1e-6


@dataclass(frozen=True)
class BSArgs:
    """Black-Scholes inputs with total log-variance ``v`` in place of sigma^2 t."""

    p0: float
    k: float
    r: float
    t: float
    v: float
    q: float = 0.0

    def __post_init__(self):
        if not (self.p0 > 0 and self.t > 0 and self.v >= 0 and self.k >= 0):
            raise DomainError("need p0 > 0, t > 0, v >= 0, k >= 0")


@dataclass(frozen=True)
class VanillaOption:
    kind: str
    strike: float
    maturity: float

    def __post_init__(self):
        if self.kind not in ("call", "put"):
            raise DomainError(f"unknown option kind {self.kind!r}")
        if not (self.strike > 0 and self.maturity > 0):
            raise DomainError("strike and maturity must be positive")


@dataclass(frozen=True)
class SpreadSpec:
    """Zero-strike spread option paying ``(S_long - S_short)^+``; ``long_leg`` picks leg 1 or 2."""

    maturity: float
    strike: float = 0.0
    long_leg: int = 1

    def __post_init__(self):
        if not self.maturity > 0:
            raise DomainError("maturity must be positive")
        if self.long_leg not in (1, 2):
            raise DomainError("long_leg must be 1 or 2")
        if self.strike != 0.0:
            raise DomainError("only zero-strike spreads are supported")


@dataclass(frozen=True)
class PriceResult:
    value: float
    truncation_error_bound: float
    terms_used: tuple[int, int]
    delta1: float | None = None
    delta2: float | None = None

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "trunc_bound": self.truncation_error_bound,
            "terms_m": self.terms_used[0],
            "terms_n": self.terms_used[1],
            "delta1": self.delta1,
            "delta2": self.delta2,
        }


@dataclass(frozen=True)
class MCResult:
    estimate: float
    std_error: float
    n_paths: int


@dataclass(frozen=True)
class InterconnectorResult:
    total: PriceResult
    by_month: dict[str, float]
    daily: tuple[tuple[dt.date, float], ...]


# ---- closed forms ------------------------------------------------------------------

def _arrays(*xs):
    """Broadcast to writable float arrays of at least one dimension, plus the output shape."""
    arrs = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in xs))
    shape = arrs[0].shape
    return [np.array(a, ndmin=1) for a in arrs], shape


def _bs_call(p0, k, r, t, v, q):
    (p0, k, v), shape = _arrays(p0, k, v)
    fwd_disc = p0 * math.exp(-q * t)
    k_disc = k * math.exp(-r * t)
    sv = np.sqrt(v)
    out = np.maximum(fwd_disc - k_disc, 0.0)
    live = (sv > 0) & (k > 0)
    if np.any(live):
        d1 = (np.log(fwd_disc[live] / k_disc[live]) + 0.5 * v[live]) / sv[live]
        out[live] = fwd_disc[live] * ndtr(d1) - k_disc[live] * ndtr(d1 - sv[live])
    return out.reshape(shape)


def black_scholes(args: BSArgs, kind: str = "call") -> float:
    call = float(_bs_call(args.p0, args.k, args.r, args.t, args.v, args.q))
    if kind == "call":
        return call
    if kind == "put":
        return call - (args.p0 * math.exp(-args.q * args.t) - args.k * math.exp(-args.r * args.t))
    raise DomainError(f"unknown option kind {kind!r}")


def _bs_terms(p0, k, r, t, v, q, kind):
    call = _bs_call(p0, k, r, t, v, q)
    if kind == "call":
        return call
    return call - (np.asarray(p0) * math.exp(-q * t) - k * math.exp(-r * t))


def margrabe(s1_eff, s2_eff, v_spread, t: float | None = None):
    """Exchange option max(S1 - S2, 0) with spread log-variance ``v_spread``; no rate enters."""
    (s1, s2, v), shape = _arrays(s1_eff, s2_eff, v_spread)
    if np.any(v < 0):
        raise DomainError("spread variance must be nonnegative")
    out = np.maximum(s1 - s2, 0.0)
    sv = np.sqrt(v)
    live = sv > 0
    if np.any(live):
        d1 = (np.log(s1[live] / s2[live]) + 0.5 * v[live]) / sv[live]
        out[live] = s1[live] * ndtr(d1) - s2[live] * ndtr(d1 - sv[live])
    out = out.reshape(shape)
    return out[()] if out.ndim == 0 else out


def margrabe_deltas(s1_eff, s2_eff, v_spread):
    """(dV/dS1, dV/dS2) of the exchange option."""
    (s1, s2, v), shape = _arrays(s1_eff, s2_eff, v_spread)
    sv = np.sqrt(v)
    itm = np.where(s1 > s2, 1.0, np.where(s1 < s2, 0.0, 0.5))
    d_one, d_two = itm.copy(), -itm
    live = sv > 0
    if np.any(live):
        d1 = (np.log(s1[live] / s2[live]) + 0.5 * v[live]) / sv[live]
        d_one[live] = ndtr(d1)
        d_two[live] = -ndtr(d1 - sv[live])
    return d_one.reshape(shape), d_two.reshape(shape)


def spread_variance(v1, v2, rho_j):
    """v1 + v2 - 2 rho sqrt(v1 v2), floored at zero."""
    v1, v2 = np.asarray(v1, dtype=float), np.asarray(v2, dtype=float)
    out = np.maximum(v1 + v2 - 2.0 * np.asarray(rho_j) * np.sqrt(v1 * v2), 0.0)
    return out[()] if out.ndim == 0 else out


# ---- series plumbing -----------------------------------------------------------------

@lru_cache(maxsize=512)
def _cached_pmf(law: JumpLaw, t: float, tail_tol: float) -> JointPmf:
    return law.pmf(t, tail_tol)


def joint_law_pmf(law: JumpLaw, t: float, tail_tol: float = DEFAULT_TAIL_TOL) -> JointPmf:
    """Joint count law, memoized (pmfs are immutable)."""
    return _cached_pmf(law, float(t), float(tail_tol))


def _series(weights: np.ndarray, terms: np.ndarray, tail_mass: float, max_error: float):
    products = weights * terms
    value = float(products.sum())
    bound = float(tail_mass) * float(np.abs(terms).max()) + 64.0 * _EPS * float(np.abs(products).sum())
    if bound > max_error:
        raise TruncationError(f"truncation bound {bound:.3e} exceeds tolerance {max_error:.3e}")
    return value, bound


# ---- vanilla ---------------------------------------------------------------------------

def price_vanilla(model: MertonLeg | GouLeg | SSMarket, option: VanillaOption, *, r: float = 0.0,
                  tail_tol: float = DEFAULT_TAIL_TOL, max_error: float = DEFAULT_MAX_ERROR) -> PriceResult:
    """Jump-count-conditioned Black-Scholes series.

    Merton legs grow at ``r``; GOU and Schwartz-Smith prices are forward
    normalized, so each term is a discounted Black-76 value.
    """
    T, K = option.maturity, option.strike
    if isinstance(model, SSMarket):
        pmf = joint_law_pmf(model.jump_law(), T, tail_tol)
        n1 = np.arange(pmf.m_max + 1)[:, None]
        n2 = np.arange(pmf.n_max + 1)[None, :]
        b = ss_b_from_pmf(model, pmf, tail_tol)
        terms = _bs_terms(ss_effective_spot(model, n1, n2, T, b), K, r, T,
                          ss_terminal_variance(model, n1, n2, T), r, option.kind)
        value, bound = _series(pmf.probs, terms, pmf.tail_mass, max_error)
        return PriceResult(value, bound, (pmf.m_max, pmf.n_max))
    mean = model.lam * T
    n_max = truncation_level(mean, tail_tol)
    n = np.arange(n_max + 1)
    weights = poisson_weights(mean, n_max)
    tail = float(poisson.sf(n_max, mean)) if mean > 0 else 0.0
    if isinstance(model, MertonLeg):
        terms = _bs_terms(merton_effective_spot(model, n, T), K, r, T, merton_terminal_variance(model, n, T),
                          0.0, option.kind)
    elif isinstance(model, GouLeg):
        terms = _bs_terms(gou_effective_spot(model, n, T), K, r, T, gou_terminal_variance(model, n, T),
                          r, option.kind)
    else:
        raise DomainError(f"unsupported model {type(model).__name__}")
    value, bound = _series(weights, terms, tail, max_error)
    return PriceResult(value, bound, (n_max, 0))


def forward_price(model: MertonLeg | GouLeg | SSMarket, T: float, *, r: float = 0.0,
                  tail_tol: float = DEFAULT_TAIL_TOL) -> float:
    """E[S(T)] assembled from the same conditional means the option series use."""
    if isinstance(model, SSMarket):
        pmf = joint_law_pmf(model.jump_law(), T, tail_tol)
        n1 = np.arange(pmf.m_max + 1)[:, None]
        n2 = np.arange(pmf.n_max + 1)[None, :]
        b = ss_b_from_pmf(model, pmf, tail_tol)
        return float((pmf.probs * ss_effective_spot(model, n1, n2, T, b)).sum())
    mean = model.lam * T
    n_max = truncation_level(mean, tail_tol)
    n = np.arange(n_max + 1)
    weights = poisson_weights(mean, n_max)
    if isinstance(model, MertonLeg):
        return float(weights @ merton_effective_spot(model, n, T)) * math.exp(r * T)
    return float(weights @ gou_effective_spot(model, n, T))


# ---- spreads ----------------------------------------------------------------------------

def _spread_block(market: MertonMarket | GouMarket, T: float, pmf: JointPmf):
    n1 = np.arange(pmf.m_max + 1)[:, None]
    n2 = np.arange(pmf.n_max + 1)[None, :]
    if isinstance(market, MertonMarket):
        s1 = merton_effective_spot(market.leg1, n1, T)
        s2 = merton_effective_spot(market.leg2, n2, T)
        base1, base2 = market.leg1.s0, market.leg2.s0
    elif isinstance(market, GouMarket):
        s1 = gou_effective_spot(market.leg1, n1, T)
        s2 = gou_effective_spot(market.leg2, n2, T)
        base1, base2 = float(market.leg1.fwd(T)), float(market.leg2.fwd(T))
    else:
        raise DomainError(f"spread pricing needs a MertonMarket or GouMarket, got {type(market).__name__}")
    v1, v2 = leg_variances(market, n1, n2, T)
    v = spread_variance(v1, v2, jump_correlation(market, n1, n2, T))
    return s1, s2, v, base1, base2


def price_spread(market: MertonMarket | GouMarket, spec: SpreadSpec, tail_tol: float = DEFAULT_TAIL_TOL,
                 max_error: float = DEFAULT_MAX_ERROR) -> PriceResult:
    """Zero-strike spread: joint count law times Margrabe terms, with both deltas."""
    T = spec.maturity
    pmf = joint_law_pmf(market.jump_law(), T, tail_tol)
    s1, s2, v, base1, base2 = _spread_block(market, T, pmf)
    if spec.long_leg == 1:
        terms = margrabe(s1, s2, v)
        d1, d2 = margrabe_deltas(s1, s2, v)
    else:
        terms = margrabe(s2, s1, v)
        d2, d1 = margrabe_deltas(s2, s1, v)
    value, bound = _series(pmf.probs, terms, pmf.tail_mass, max_error)
    # each effective spot is proportional to its leg's initial price
    delta1 = float((pmf.probs * d1 * s1).sum()) / base1
    delta2 = float((pmf.probs * d2 * s2).sum()) / base2
    return PriceResult(value, bound, (pmf.m_max, pmf.n_max), delta1, delta2)


def greeks_spread(market: MertonMarket | GouMarket, spec: SpreadSpec,
                  tail_tol: float = DEFAULT_TAIL_TOL) -> dict[str, float]:
    res = price_spread(market, spec, tail_tol)
    return {"delta1": res.delta1, "delta2": res.delta2}


def price_interconnector(market: GouMarket, delivery_days: list[dt.date], valuation_date: dt.date,
                         day_count: float = DAY_COUNT, tail_tol: float = DEFAULT_TAIL_TOL,
                         max_error: float = DEFAULT_MAX_ERROR, long_leg: int = 1) -> InterconnectorResult:
    """Sum of daily zero-strike spread options, one per delivery day.

    Each day pays the long leg minus the other leg, floored at zero; the
    long leg is the export market.
    """
    if not delivery_days:
        raise DomainError("no delivery days")
    daily, months = [], OrderedDict()
    total = bound = 0.0
    terms_m = terms_n = 0
    delta1 = delta2 = 0.0
    for day in sorted(delivery_days):
        T = (day - valuation_date).days / day_count
        if T <= 0:
            raise DomainError(f"delivery day {day} is not after the valuation date {valuation_date}")
        res = price_spread(market, SpreadSpec(T, long_leg=long_leg), tail_tol, max_error)
        daily.append((day, res.value))
        key = f"{day.year:04d}-{day.month:02d}"
        months[key] = months.get(key, 0.0) + res.value
        total += res.value
        bound += res.truncation_error_bound
        terms_m, terms_n = max(terms_m, res.terms_used[0]), max(terms_n, res.terms_used[1])
        delta1 += res.delta1
        delta2 += res.delta2
    return InterconnectorResult(PriceResult(total, bound, (terms_m, terms_n), delta1, delta2),
                                dict(months), tuple(daily))


def dependence_comparison(market: MertonMarket | GouMarket, spec: SpreadSpec, a: float,
                          tail_tol: float = DEFAULT_TAIL_TOL) -> dict[str, float]:
    """Cointegrated spread value at ``a`` next to the common-jump value with the same count correlation."""
    l1, l2 = market.leg1.lam, market.leg2.lam
    coint = replace(market, coupling=Coupling("cointegrated", a=a))
    rho = joint_law_pmf(coint.jump_law(), spec.maturity, tail_tol).correlation()
    lam = matched_common_intensity(rho, l1, l2)
    common = replace(market, coupling=Coupling("common", lambda_common=lam))
    return {
        "a": a,
        "rho": rho,
        "lambda_common": lam,
        "common": price_spread(common, spec, tail_tol).value,
        "cointegrated": price_spread(coint, spec, tail_tol).value,
    }


# ---- Monte Carlo ----------------------------------------------------------------------------

class _Accumulator:
    """Mean and standard error, shifted by the first value so constant payoffs are exact."""

    def __init__(self):
        self.shift = None
        self.n = 0
        self.s1: list[float] = []
        self.s2: list[float] = []

    def add(self, x: np.ndarray) -> None:
        if self.shift is None:
            self.shift = float(x[0])
        y = x - self.shift
        self.s1.append(math.fsum(y))
        self.s2.append(math.fsum(y * y))
        self.n += x.size

    def result(self) -> MCResult:
        m1 = math.fsum(self.s1) / self.n
        var = max(math.fsum(self.s2) / self.n - m1 * m1, 0.0) * self.n / max(self.n - 1, 1)
        return MCResult(self.shift + m1, math.sqrt(var / self.n), self.n)


def _correlated(gen: np.random.Generator, rho: float, size: int) -> tuple[np.ndarray, np.ndarray]:
    z1 = gen.standard_normal(size)
    z2 = rho * z1 + math.sqrt(max(1.0 - rho * rho, 0.0)) * gen.standard_normal(size)
    return z1, z2


def _merton_terminal(leg: MertonLeg, n, T, r, z_diff, z_jump):
    drift = (r - 0.5 * leg.sigma ** 2 - leg.lam * (leg.jump_m - 1.0)) * T
    log_jump = n * (math.log(leg.jump_m) - 0.5 * leg.jump_nu ** 2) + leg.jump_nu * np.sqrt(n) * z_jump
    return leg.s0 * np.exp(drift + leg.sigma * math.sqrt(T) * z_diff + log_jump)


def _gou_terminal(leg: GouLeg, n, T, z_diff, z_jump):
    d = math.exp(-leg.k * T)
    u = math.sqrt(ou_variance(leg.k, leg.sigma, T)) * z_diff + d * (n * leg.jump_m + leg.jump_nu * np.sqrt(n) * z_jump)
    return float(leg.fwd(T)) * np.exp(u - gou_a(leg, T) - gou_b(leg, T))


def _ss_terminal(m: SSMarket, n1, n2, T, b, gen, size):
    v_short = ou_variance(m.k, m.sigma1, T)
    v_long = m.sigma2 ** 2 * T
    cov = m.rho * m.sigma1 * m.sigma2 * -math.expm1(-m.k * T) / m.k
    denom = math.sqrt(v_short * v_long)
    z1, z2 = _correlated(gen, cov / denom if denom > 0 else 0.0, size)
    d = math.exp(-m.k * T)
    jump_mean = (d * n1 + n2) * m.jump_m
    jump_sd = np.sqrt(d * d * n1 + n2) * m.jump_nu
    u = m.mu * T + math.sqrt(v_short) * z1 + math.sqrt(v_long) * z2 + jump_mean + jump_sd * gen.standard_normal(size)
    return float(m.fwd(T)) * np.exp(u - ss_a(m, T) - b)


def mc_price(model, payoff: str, n_paths: int, seed: int, maturity: float, strike: float = 0.0,
             r: float = 0.0, tail_tol: float = DEFAULT_TAIL_TOL) -> MCResult:
    """Exact terminal sampling: draw jump counts, then the conditional Gaussian log-price.

    ``payoff`` is ``call``, ``put`` or ``terminal`` (undiscounted S(T)) for a
    single asset; ``spread`` (S1 - S2)^+, ``spread21`` (S2 - S1)^+,
    ``terminal1`` or ``terminal2`` for a pair.
    Merton prices grow at ``r`` and are discounted; GOU and Schwartz-Smith
    options are discounted at ``r``, pair payoffs are not.
    """
    if n_paths < 1000:
        raise DomainError("need at least 1000 paths")
    T = maturity
    pair = isinstance(model, (MertonMarket, GouMarket))
    allowed = ("spread", "spread21", "terminal1", "terminal2") if pair else ("call", "put", "terminal")
    if payoff not in allowed:
        raise DomainError(f"payoff {payoff!r} not available for {type(model).__name__}")
    b_ss = None
    if isinstance(model, SSMarket):
        b_ss = ss_b_from_pmf(model, joint_law_pmf(model.jump_law(), T, tail_tol), tail_tol)
    acc = _Accumulator()
    for _, size, gen in _rng.blocks(seed, n_paths):
        if isinstance(model, MertonLeg):
            n = gen.poisson(model.lam * T, size)
            s = _merton_terminal(model, n, T, r, gen.standard_normal(size), gen.standard_normal(size))
        elif isinstance(model, GouLeg):
            n = gen.poisson(model.lam * T, size)
            s = _gou_terminal(model, n, T, gen.standard_normal(size), gen.standard_normal(size))
        elif isinstance(model, SSMarket):
            n1, n2 = draw_counts(model.jump_law(), T, size, gen)
            s = _ss_terminal(model, n1, n2, T, b_ss, gen, size)
        elif pair:
            n1, n2 = draw_counts(model.jump_law(), T, size, gen)
            v1, v2 = (merton_terminal_variance(model.leg1, 0, T), merton_terminal_variance(model.leg2, 0, T)) \
                if isinstance(model, MertonMarket) else (ou_variance(model.leg1.k, model.leg1.sigma, T),
                                                         ou_variance(model.leg2.k, model.leg2.sigma, T))
            denom = math.sqrt(v1 * v2)
            zw1, zw2 = _correlated(gen, diffusion_covariance(model, T) / denom if denom > 0 else 0.0, size)
            zd1, zd2 = _correlated(gen, model.rho_d, size)
            if isinstance(model, MertonMarket):
                s1 = _merton_terminal(model.leg1, n1, T, model.r, zw1, zd1)
                s2 = _merton_terminal(model.leg2, n2, T, model.r, zw2, zd2)
            else:
                s1 = _gou_terminal(model.leg1, n1, T, zw1, zd1)
                s2 = _gou_terminal(model.leg2, n2, T, zw2, zd2)
        else:
            raise DomainError(f"unsupported model {type(model).__name__}")

        if payoff == "terminal":
            x = s
        elif payoff == "call":
            x = math.exp(-r * T) * np.maximum(s - strike, 0.0)
        elif payoff == "put":
            x = math.exp(-r * T) * np.maximum(strike - s, 0.0)
        elif payoff == "terminal1":
            x = s1
        elif payoff == "terminal2":
            x = s2
        else:
            x = np.maximum(s1 - s2 - strike, 0.0) if payoff == "spread" else np.maximum(s2 - s1 - strike, 0.0)
            if isinstance(model, MertonMarket):
                x = x * math.exp(-model.r * T)
        acc.add(np.asarray(x, dtype=float))
    return acc.result()
