"""Market models: Merton jump-diffusion, GOU with damped jumps, two-factor Schwartz-Smith.

Every model reduces, conditionally on the jump counts, to a lognormal
terminal price. This module supplies the two numbers that pin that law
down: the conditional mean (the "effective spot" fed to Black-Scholes) and
the total log-variance.
"""
from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bipoisson import DEFAULT_TAIL_TOL, KINDS, JointPmf, JumpLaw
from .errors import ConfigError, CurveError, DomainError, TruncationError

DAY_COUNT = 365.0


# ---- forward curves ------------------------------------------------------------

@dataclass(frozen=True)
class ForwardCurve:
    """Piecewise forward curve ``t -> F(0, t)`` on delivery buckets.

    ``starts[i]`` is the start (years from valuation) of bucket ``i``; the last
    bucket ends at ``end``. ``interpolation="step"`` returns the bucket price;
    ``"linear"`` interpolates between bucket starts.
    """

    starts: np.ndarray
    prices: np.ndarray
    end: float
    interpolation: str = "step"

    def __post_init__(self):
        starts = np.asarray(self.starts, dtype=float)
        prices = np.asarray(self.prices, dtype=float)
        object.__setattr__(self, "starts", starts)
        object.__setattr__(self, "prices", prices)
        if starts.ndim != 1 or starts.shape != prices.shape or starts.size == 0:
            raise CurveError("curve needs matching, nonempty start and price vectors")
        if np.any(np.diff(starts) <= 0) or self.end <= starts[-1]:
            raise CurveError("bucket starts must increase and precede the curve end")
        if np.any(prices <= 0):
            raise CurveError("forward prices must be positive")
        if self.interpolation not in ("step", "linear"):
            raise CurveError(f"unknown interpolation {self.interpolation!r}")

    @classmethod
    def flat(cls, price: float, end: float = 10.0) -> ForwardCurve:
        return cls(np.array([0.0]), np.array([float(price)]), end)

    @classmethod
    def from_csv(cls, path: str | Path, valuation_date: dt.date, interpolation: str = "step",
                 day_count: float = DAY_COUNT) -> ForwardCurve:
        """Read ``date,price`` rows; each row opens a bucket that runs to the next date."""
        dates, prices = _read_date_price_csv(path)
        starts = np.array([(d - valuation_date).days / day_count for d in dates])
        end = starts[-1] + 1.0 / day_count
        return cls(starts, np.array(prices), end, interpolation)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < self.starts[0]) or np.any(t > self.end):
            raise CurveError(f"maturity outside curve support [{self.starts[0]}, {self.end}]")
        if self.interpolation == "linear":
            out = np.interp(t, self.starts, self.prices)
        else:
            idx = np.searchsorted(self.starts, t, side="right") - 1
            out = self.prices[idx]
        return out[()] if out.ndim == 0 else out


def _read_date_price_csv(path: str | Path) -> tuple[list[dt.date], list[float]]:
    dates, prices = [], []
    with open(path, newline="") as fh:
        rows = (line for line in fh if not line.startswith("#"))
        reader = csv.DictReader(rows)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["date", "price"]:
            raise ConfigError(f"{path}: expected header 'date,price', got {reader.fieldnames}")
        for i, row in enumerate(reader, start=2):
            try:
                dates.append(dt.date.fromisoformat(row["date"].strip()))
                prices.append(float(row["price"]))
            except (ValueError, AttributeError) as exc:
                raise ConfigError(f"{path}: bad row {i}: {row}") from exc
    if not dates:
        raise ConfigError(f"{path}: no data rows")
    return dates, prices


# ---- parameter records -----------------------------------------------------------

@dataclass(frozen=True)
class Coupling:
    """How the two jump counters depend on each other: kind plus its parameter."""

    kind: str = "independent"
    a: float = 0.0
    lambda_common: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown dependence kind {self.kind!r}")

    def law(self, lambda1: float, lambda2: float) -> JumpLaw:
        return JumpLaw(self.kind, lambda1, lambda2, a=self.a, lambda_common=self.lambda_common)


def _check_corr(name: str, rho: float) -> None:
    if not -1.0 <= rho <= 1.0:
        raise DomainError(f"{name} must lie in [-1, 1], got {rho}")


@dataclass(frozen=True)
class MertonLeg:
    """GBM with lognormal multiplicative jumps of mean ``jump_m``."""

    s0: float
    sigma: float
    lam: float
    jump_m: float
    jump_nu: float

    def __post_init__(self):
        if not self.s0 > 0:
            raise DomainError("s0 must be positive")
        if self.sigma < 0 or self.lam < 0 or self.jump_nu < 0:
            raise DomainError("sigma, lam and jump_nu must be nonnegative")
        if not self.jump_m > 0:
            raise DomainError("jump_m is a mean jump multiplier and must be positive")


@dataclass(frozen=True)
class MertonMarket:
    leg1: MertonLeg
    leg2: MertonLeg
    rho_w: float
    rho_d: float
    r: float = 0.0
    coupling: Coupling = field(default_factory=Coupling)

    def __post_init__(self):
        _check_corr("rho_w", self.rho_w)
        _check_corr("rho_d", self.rho_d)
        self.jump_law()  # validates the coupling against the intensities

    def jump_law(self) -> JumpLaw:
        return self.coupling.law(self.leg1.lam, self.leg2.lam)


@dataclass(frozen=True)
class GouLeg:
    """Exponential OU spot ``F(0,t) exp(U(t) + h(t))`` with jumps damped by ``e^{-k t}``."""

    fwd: ForwardCurve
    k: float
    sigma: float
    lam: float
    jump_m: float
    jump_nu: float

    def __post_init__(self):
        if not self.k > 0:
            raise DomainError("k must be positive")
        if self.sigma < 0 or self.lam < 0 or self.jump_nu < 0:
            raise DomainError("sigma, lam and jump_nu must be nonnegative")


@dataclass(frozen=True)
class GouMarket:
    """Two GOU legs. Spread values on this market are forward-normalized and undiscounted."""

    leg1: GouLeg
    leg2: GouLeg
    rho_w: float
    rho_d: float
    coupling: Coupling = field(default_factory=Coupling)

    def __post_init__(self):
        _check_corr("rho_w", self.rho_w)
        _check_corr("rho_d", self.rho_d)
        self.jump_law()

    def jump_law(self) -> JumpLaw:
        return self.coupling.law(self.leg1.lam, self.leg2.lam)


@dataclass(frozen=True)
class SSMarket:
    """Two-factor spot: OU short factor plus drifted Brownian long factor, each with jumps.

    Both factors share the jump-size law N(jump_m, jump_nu^2); their jump
    counters have intensities ``lam1`` and ``lam2`` coupled by ``coupling``.
    """

    fwd: ForwardCurve
    k: float
    sigma1: float
    sigma2: float
    rho: float
    mu: float
    jump_m: float
    jump_nu: float
    lam1: float
    lam2: float
    coupling: Coupling = field(default_factory=Coupling)

    def __post_init__(self):
        if not self.k > 0:
            raise DomainError("k must be positive")
        if min(self.sigma1, self.sigma2, self.jump_nu, self.lam1, self.lam2) < 0:
            raise DomainError("volatilities, jump_nu and intensities must be nonnegative")
        _check_corr("rho", self.rho)
        self.jump_law()

    def jump_law(self) -> JumpLaw:
        return self.coupling.law(self.lam1, self.lam2)


# ---- Merton ----------------------------------------------------------------------

def merton_terminal_variance(leg: MertonLeg, n, T: float):
    return leg.sigma ** 2 * T + np.asarray(n) * leg.jump_nu ** 2


def merton_effective_spot(leg: MertonLeg, n, T: float):
    """S0 M^n exp(lam T (1 - M)): the jump-conditioned initial price."""
    n = np.asarray(n, dtype=float)
    return leg.s0 * np.exp(n * math.log(leg.jump_m) + leg.lam * T * (1.0 - leg.jump_m))


# ---- GOU ---------------------------------------------------------------------------

def ou_variance(k: float, sigma: float, t: float) -> float:
    """Var of sigma * int_0^t e^{-k(t-s)} dW(s)."""
    return sigma ** 2 * -math.expm1(-2.0 * k * t) / (2.0 * k)


def gou_a(leg: GouLeg, t: float) -> float:
    """log E[exp(U^C(t))] with U(0) = 0: half the OU variance."""
    return 0.5 * ou_variance(leg.k, leg.sigma, t)


def gou_b(leg: GouLeg, t: float) -> float:
    """log E[exp(U^D(t))] = lam t (exp(e^{-kt}(M + e^{-kt} nu^2 / 2)) - 1)."""
    d = math.exp(-leg.k * t)
    return leg.lam * t * math.expm1(d * (leg.jump_m + 0.5 * d * leg.jump_nu ** 2))


def gou_h(leg: GouLeg, t: float) -> float:
    return -gou_a(leg, t) - gou_b(leg, t)


def gou_effective_spot(leg: GouLeg, n, T: float):
    d = math.exp(-leg.k * T)
    n = np.asarray(n, dtype=float)
    return float(leg.fwd(T)) * np.exp(-gou_b(leg, T) + n * d * (0.5 * d * leg.jump_nu ** 2 + leg.jump_m))


def gou_terminal_variance(leg: GouLeg, n, T: float):
    return ou_variance(leg.k, leg.sigma, T) + np.asarray(n) * math.exp(-2.0 * leg.k * T) * leg.jump_nu ** 2


# ---- Schwartz-Smith -------------------------------------------------------------------

def ss_variance(market: SSMarket, t: float) -> float:
    m = market
    return (ou_variance(m.k, m.sigma1, t) + m.sigma2 ** 2 * t
            + 2.0 * m.rho * m.sigma1 * m.sigma2 * -math.expm1(-m.k * t) / m.k)


def ss_a(market: SSMarket, t: float) -> float:
    return market.mu * t + 0.5 * ss_variance(market, t)


def _ss_jump_factors(market: SSMarket, t: float) -> tuple[float, float]:
    """Log of the jump-size mgf at e^{-kt} (short factor) and at 1 (long factor)."""
    d = math.exp(-market.k * t)
    m, nu = market.jump_m, market.jump_nu
    return m * d + 0.5 * nu ** 2 * d * d, m + 0.5 * nu ** 2


def ss_b_from_pmf(market: SSMarket, pmf: JointPmf, tail_tol: float = DEFAULT_TAIL_TOL) -> float:
    g1, g2 = _ss_jump_factors(market, pmf.t)
    w = pmf.probs * np.exp(np.arange(pmf.m_max + 1)[:, None] * g1 + np.arange(pmf.n_max + 1)[None, :] * g2)
    total = w.sum()
    edge = w[-1, :].sum() + w[:, -1].sum()
    if edge > tail_tol * total:
        raise TruncationError(f"jump-compensator series not converged: edge terms {edge:.3e} vs total {total:.3e}")
    return float(math.log(total))


def ss_b(market: SSMarket, t: float, tail_tol: float = DEFAULT_TAIL_TOL) -> float:
    """log E[exp(U^D(t))] summed over the joint law of the two jump counters."""
    return ss_b_from_pmf(market, market.jump_law().pmf(t, tail_tol), tail_tol)


def ss_effective_spot(market: SSMarket, n1, n2, T: float, b: float | None = None):
    """F(0,T) exp(-b + n1 log-mgf(e^{-kT}) + n2 log-mgf(1)).

    The drift ``mu T`` sits in ``a(T)`` and cancels against the mean of the
    continuous part, so it does not appear here.
    """
    if b is None:
        b = ss_b(market, T)
    g1, g2 = _ss_jump_factors(market, T)
    return float(market.fwd(T)) * np.exp(-b + np.asarray(n1, dtype=float) * g1 + np.asarray(n2, dtype=float) * g2)


def ss_terminal_variance(market: SSMarket, n1, n2, T: float):
    d2 = math.exp(-2.0 * market.k * T)
    return ss_variance(market, T) + (d2 * np.asarray(n1) + np.asarray(n2)) * market.jump_nu ** 2


# ---- conditional correlation of the two log-price innovations ---------------------------

def diffusion_covariance(market: MertonMarket | GouMarket, t: float) -> float:
    l1, l2 = market.leg1, market.leg2
    if isinstance(market, MertonMarket):
        return market.rho_w * l1.sigma * l2.sigma * t
    ksum = l1.k + l2.k
    return market.rho_w * l1.sigma * l2.sigma * -math.expm1(-ksum * t) / ksum


def leg_variances(market: MertonMarket | GouMarket, n, m, t: float):
    if isinstance(market, MertonMarket):
        return merton_terminal_variance(market.leg1, n, t), merton_terminal_variance(market.leg2, m, t)
    return gou_terminal_variance(market.leg1, n, t), gou_terminal_variance(market.leg2, m, t)


def jump_covariance(market: MertonMarket | GouMarket, n, m, t: float):
    jumps = market.rho_d * np.sqrt(np.asarray(n) * np.asarray(m)) * market.leg1.jump_nu * market.leg2.jump_nu
    if isinstance(market, GouMarket):
        jumps = jumps * math.exp(-(market.leg1.k + market.leg2.k) * t)
    return diffusion_covariance(market, t) + jumps


def jump_correlation(market: MertonMarket | GouMarket, n, m, t: float):
    """Correlation of the two log-price innovations given n and m jumps."""
    v1, v2 = leg_variances(market, n, m, t)
    denom = np.sqrt(v1 * v2)
    cov = jump_covariance(market, n, m, t)
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = np.where(denom > 0, cov / np.where(denom > 0, denom, 1.0), 0.0)
    rho = np.clip(rho, -1.0, 1.0)
    return rho[()] if rho.ndim == 0 else rho
