"""Two-step maximum likelihood for GOU-with-jumps price pairs.

Step one fits each deseasonalized log-price ``u`` to the Euler transition
density of its own OU-plus-jump dynamics, a two-component Gaussian
mixture. Step two holds both marginals fixed and fits the diffusion
correlation, the jump-size correlation and the jump coupling (common
intensity or weight ``a``) through a four-component bivariate mixture whose
weights are the one-step jump-indicator probabilities.

Jump damping clock: the Euler step multiplies a jump by ``e^{-k t}``. With
``clock="local"`` (default) ``t`` restarts at every step, so the factor is
1; with ``clock="absolute"`` ``t`` is the time elapsed since the first
observation.
"""
from __future__ import annotations

import csv
import datetime as dt
import math
from collections.abc import Callable
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit, logit

from . import rng as _rng
from .bipoisson import JumpLaw, StepProbs, step_probs
from .errors import DomainError, FitError
from .models import DAY_COUNT, _read_date_price_csv

MIN_FIT_LENGTH = 100
MAX_JUMP_PROB = 0.5
_LOG_2PI = math.log(2.0 * math.pi)


# ---- data records -------------------------------------------------------------------

@dataclass(frozen=True)
class PriceSeries:
    dates: tuple[dt.date, ...]
    prices: np.ndarray
    dt: float = 1.0 / DAY_COUNT

    def __post_init__(self):
        prices = np.asarray(self.prices, dtype=float)
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "dates", tuple(self.dates))
        if len(self.dates) != prices.size:
            raise DomainError("dates and prices differ in length")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise DomainError("dates must be strictly increasing")
        if np.any(~(prices > 0)):
            raise DomainError("prices must be positive")
        if not self.dt > 0:
            raise DomainError("dt must be positive")

    @classmethod
    def from_csv(cls, path: str | Path, dt_years: float = 1.0 / DAY_COUNT) -> PriceSeries:
        dates, prices = _read_date_price_csv(path)
        return cls(tuple(dates), np.array(prices), dt_years)

    def to_csv(self, path: str | Path, comments: tuple[str, ...] = ()) -> None:
        with open(path, "w", newline="") as fh:
            for line in comments:
                fh.write(f"# {line}\n")
            fh.write("date,price\n")
            for d, p in zip(self.dates, self.prices):
                fh.write(f"{d.isoformat()},{p:.10g}\n")


@dataclass(frozen=True)
class DeseasonalizedSeries:
    dates: tuple[dt.date, ...]
    u: np.ndarray
    seasonal: Callable[[dt.date], float]
    coefficients: dict[str, float]
    dt: float = 1.0 / DAY_COUNT


@dataclass(frozen=True)
class Theta:
    """Per-asset parameters: reversion k, volatility, jump intensity, jump mean and jump sd."""

    k: float
    sigma: float
    lam: float
    jump_m: float
    jump_nu: float

    def __post_init__(self):
        if not (self.k > 0 and self.sigma > 0 and self.lam >= 0 and self.jump_nu >= 0):
            raise DomainError(f"invalid parameters {self}")


@dataclass(frozen=True)
class SingleFit:
    theta: Theta
    loglik: float
    converged: bool
    n_converged: int
    at_bound: tuple[str, ...] = ()


@dataclass(frozen=True)
class CalibrationResult:
    theta1: Theta
    theta2: Theta
    kind: str
    rho_w: float
    rho_d: float
    a: float | None
    lambda_common: float | None
    loglik: float
    converged: bool
    constraint_active: tuple[str, ...] = ()
    notes: tuple[str, ...] = ()
    n_converged: int = 0
    start_logliks: tuple[float, ...] = field(default=(), repr=False)

    def to_dict(self) -> dict:
        out = asdict(self)
        out.pop("start_logliks")
        out["constraint_active"] = list(self.constraint_active)
        out["notes"] = list(self.notes)
        return out

    def summary_row(self) -> dict[str, object]:
        row = {"kind": self.kind}
        for tag, th in (("1", self.theta1), ("2", self.theta2)):
            for name, value in asdict(th).items():
                row[f"{name}{tag}"] = value
        row.update(rho_w=self.rho_w, rho_d=self.rho_d, a=self.a, lambda_common=self.lambda_common,
                   loglik=self.loglik, converged=self.converged,
                   constraint_active=";".join(self.constraint_active))
        return row


# ---- deseasonalization ----------------------------------------------------------------

def deseasonalize(series: PriceSeries, month_effects: bool = True) -> DeseasonalizedSeries:
    """Regress log prices on intercept, linear trend, weekday and calendar-month dummies.

    Month dummies also soak up the slow part of a strongly mean-reverting
    residual; on two years of data they inflate the fitted reversion speed
    noticeably. ``month_effects=False`` drops them when the data carries no
    monthly pattern.
    """
    n = len(series.dates)
    if n < 28:
        raise FitError(f"need at least four weeks of data to separate seasonal effects, got {n} points")
    y = np.log(series.prices)
    origin = series.dates[0]
    years = np.array([(d - origin).days / DAY_COUNT for d in series.dates])
    weekdays = sorted({d.weekday() for d in series.dates})
    months = sorted({d.month for d in series.dates}) if month_effects else []
    columns = [np.ones(n), years]
    names = ["intercept", "trend"]
    for wd in weekdays[1:]:
        columns.append(np.array([d.weekday() == wd for d in series.dates], dtype=float))
        names.append(f"weekday{wd}")
    for mo in months[1:]:
        columns.append(np.array([d.month == mo for d in series.dates], dtype=float))
        names.append(f"month{mo}")
    X = np.column_stack(columns)
    if np.linalg.matrix_rank(X) < X.shape[1]:
        raise FitError("seasonal regressors are rank deficient", {"columns": names})
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    coef = dict(zip(names, (float(b) for b in beta)))
    u = y - X @ beta

    def seasonal(day: dt.date) -> float:
        out = coef["intercept"] + coef["trend"] * (day - origin).days / DAY_COUNT
        out += coef.get(f"weekday{day.weekday()}", 0.0)
        out += coef.get(f"month{day.month}", 0.0)
        return out

    return DeseasonalizedSeries(series.dates, u, seasonal, coef, series.dt)


# ---- one-dimensional likelihood -----------------------------------------------------------

def _damping(k: float, n_steps: int, dt_years: float, clock: str) -> np.ndarray | float:
    if clock == "local":
        return 1.0
    if clock == "absolute":
        return np.exp(-k * dt_years * np.arange(n_steps))
    raise DomainError(f"unknown clock {clock!r}")


def _log_normal_pdf(x, mean, var):
    return -0.5 * (_LOG_2PI + np.log(var) + (x - mean) ** 2 / var)


def transition_density_1d(u_next, u, theta: Theta, t: float, dt: float):
    """Euler transition density: no-jump and one-jump Gaussian components."""
    p_jump = theta.lam * dt
    if p_jump >= 1:
        raise DomainError(f"lam * dt = {p_jump} must be below 1")
    d = math.exp(-theta.k * t)
    mean_c = (1.0 - theta.k * dt) * np.asarray(u, dtype=float)
    var_c = theta.sigma ** 2 * dt
    var_j = var_c + d * d * theta.jump_nu ** 2
    x = np.asarray(u_next, dtype=float)
    dens = (1.0 - p_jump) * np.exp(_log_normal_pdf(x, mean_c, var_c))
    if p_jump > 0:
        dens = dens + p_jump * np.exp(_log_normal_pdf(x, mean_c + theta.jump_m * d, var_j))
    return dens


def log_likelihood_1d(u: np.ndarray, theta: Theta, dt: float, clock: str = "local") -> float:
    u = np.asarray(u, dtype=float)
    p_jump = theta.lam * dt
    if p_jump >= 1:
        raise DomainError(f"lam * dt = {p_jump} must be below 1")
    d = _damping(theta.k, u.size - 1, dt, clock)
    resid = u[1:] - (1.0 - theta.k * dt) * u[:-1]
    var_c = theta.sigma ** 2 * dt
    lc = _log_normal_pdf(resid, 0.0, var_c)
    if p_jump == 0:
        return float(lc.sum())
    lj = _log_normal_pdf(resid, theta.jump_m * d, var_c + d * d * theta.jump_nu ** 2)
    return float(np.logaddexp(math.log1p(-p_jump) + lc, math.log(p_jump) + lj).sum())


_SINGLE_NAMES = ("k", "sigma", "lam", "jump_m", "jump_nu")


def _theta_from_x(x: np.ndarray, dt: float) -> Theta:
    return Theta(math.exp(x[0]), math.exp(x[1]), MAX_JUMP_PROB * float(expit(x[2])) / dt, float(x[3]),
                 math.exp(x[4]))


def _x_from_theta(th: Theta, dt: float) -> np.ndarray:
    return np.array([math.log(th.k), math.log(th.sigma), logit(th.lam * dt / MAX_JUMP_PROB), th.jump_m,
                     math.log(max(th.jump_nu, 1e-8))])


def fit_single_asset(d: DeseasonalizedSeries | np.ndarray, *, dt: float | None = None, n_starts: int = 8,
                     clock: str = "local") -> SingleFit:
    """Multistart box-constrained maximum likelihood for one asset.

    Starting grid: k from the lag-one autoregression, sigma from the median
    absolute residual, jump probability per step in {0.05, 0.15, 0.25, 0.4}
    crossed with jump sd of 2 and 5 diffusion sds, jump mean 0. Beyond eight
    starts the grid repeats with jump mean at plus and minus one diffusion sd.
    """
    u = np.asarray(d.u if isinstance(d, DeseasonalizedSeries) else d, dtype=float)
    if dt is None:
        dt = d.dt if isinstance(d, DeseasonalizedSeries) else 1.0 / DAY_COUNT
    if u.size < MIN_FIT_LENGTH:
        raise FitError(f"need at least {MIN_FIT_LENGTH} observations, got {u.size}")
    x0, x1 = u[:-1], u[1:]
    denom = float(x0 @ x0)
    phi = float(x0 @ x1) / denom if denom > 0 else 0.0
    resid = x1 - phi * x0
    scale = 1.4826 * float(np.median(np.abs(resid - np.median(resid))))
    spread = float(resid.std())
    if not spread > 1e-10 * max(1.0, float(np.abs(u).max())):
        raise FitError("series has no randomness; volatility is not identifiable",
                       {"residual_sd": spread})
    scale = scale if scale > 0 else spread
    k0 = min(max((1.0 - phi) / dt, 1e-2), 1e3)
    sigma0 = scale / math.sqrt(dt)

    grid = []
    for m_shift in (0.0, -1.0, 1.0):
        for p in (0.05, 0.15, 0.25, 0.4):
            for nu_mult in (2.0, 5.0):
                grid.append(Theta(k0, sigma0, p / dt, m_shift * scale, nu_mult * scale))
    starts = grid[: max(n_starts, 1)]
    bounds = [(math.log(1e-3), math.log(1e4)),
              (math.log(sigma0) - 12.0, math.log(sigma0) + 5.0),
              (-12.0, 12.0),
              (-20.0 * spread - 1.0, 20.0 * spread + 1.0),
              (math.log(1e-6 * scale + 1e-12), math.log(50.0 * spread + 1.0))]

    def objective(x):
        try:
            return -log_likelihood_1d(u, _theta_from_x(x, dt), dt, clock)
        except (DomainError, FloatingPointError, OverflowError):
            return 1e300

    results = []
    for th in starts:
        x_start = np.clip(_x_from_theta(th, dt), [b[0] for b in bounds], [b[1] for b in bounds])
        res = minimize(objective, x_start, method="L-BFGS-B", bounds=bounds,
                       options={"maxiter": 500, "ftol": 1e-12, "gtol": 1e-8})
        if np.isfinite(res.fun) and res.fun < 1e299:
            results.append(res)
    ok = [r for r in results if r.success]
    if not ok:
        raise FitError("no start converged", {"messages": [str(r.message) for r in results]})
    best = min(ok, key=lambda r: r.fun)
    at_bound = tuple(
        f"{name}_{side}"
        for name, value, (lo, hi) in zip(_SINGLE_NAMES, best.x, bounds)
        for side, edge in (("lower", lo), ("upper", hi))
        if abs(value - edge) < 1e-6
    )
    return SingleFit(_theta_from_x(best.x, dt), -float(best.fun), True, len(ok), at_bound)


# ---- joint likelihood ------------------------------------------------------------------------

def _pair_logpdf(e1, e2, m1, m2, v1, v2, cov):
    det = v1 * v2 - cov * cov
    x, y = e1 - m1, e2 - m2
    quad = (v2 * x * x - 2.0 * cov * x * y + v1 * y * y) / det
    return -_LOG_2PI - 0.5 * np.log(det) - 0.5 * quad


def joint_log_likelihood(u1: np.ndarray, u2: np.ndarray, theta1: Theta, theta2: Theta, rho_w: float,
                         rho_d: float, probs: StepProbs, dt: float, clock: str = "local") -> float:
    """Bivariate four-component mixture log-likelihood with both marginals fixed."""
    n_steps = len(u1) - 1
    e1 = u1[1:] - (1.0 - theta1.k * dt) * u1[:-1]
    e2 = u2[1:] - (1.0 - theta2.k * dt) * u2[:-1]
    d1 = _damping(theta1.k, n_steps, dt, clock)
    d2 = _damping(theta2.k, n_steps, dt, clock)
    vc1, vc2 = theta1.sigma ** 2 * dt, theta2.sigma ** 2 * dt
    vj1 = vc1 + d1 * d1 * theta1.jump_nu ** 2
    vj2 = vc2 + d2 * d2 * theta2.jump_nu ** 2
    cov_c = rho_w * math.sqrt(vc1 * vc2)
    cov_jj = cov_c + rho_d * theta1.jump_nu * theta2.jump_nu * d1 * d2
    mj1, mj2 = theta1.jump_m * d1, theta2.jump_m * d2
    parts = []
    for weight, m1, m2, v1, v2, cov in (
        (probs.p00, 0.0, 0.0, vc1, vc2, cov_c),
        (probs.p01, 0.0, mj2, vc1, vj2, cov_c),
        (probs.p10, mj1, 0.0, vj1, vc2, cov_c),
        (probs.p11, mj1, mj2, vj1, vj2, cov_jj),
    ):
        if weight > 0:
            parts.append(math.log(weight) + _pair_logpdf(e1, e2, m1, m2, v1, v2, cov))
    return float(np.logaddexp.reduce(np.vstack(parts), axis=0).sum())


_RHO_CAP = 5.0    # |atanh(rho)| bound, |rho| <= 0.99991
_LOGIT_CAP = 12.0


def _joint_names(kind: str) -> tuple[str, ...]:
    extra = {"independent": (), "common": ("lambda_common",), "cointegrated": ("a",)}[kind]
    return ("rho_w", "rho_d") + extra


def _joint_unpack(x, kind: str, lam_cap: float):
    rho_w, rho_d = math.tanh(x[0]), math.tanh(x[1])
    a = lam_c = 0.0
    if kind == "common":
        lam_c = lam_cap * float(expit(x[2]))
    elif kind == "cointegrated":
        a = float(expit(x[2]))
    return rho_w, rho_d, a, lam_c


def fit_joint(d1: DeseasonalizedSeries, d2: DeseasonalizedSeries, theta1: Theta, theta2: Theta, kind: str,
              *, n_starts: int = 8, clock: str = "local", seed: int = 0) -> CalibrationResult:
    """Second step: correlations and jump coupling with both marginals held fixed.

    The first starts use the residual correlation for both correlations and a
    coupling grid; the others are drawn uniformly from a counter-based stream
    keyed by ``seed``. The likelihood in ``a`` has a kink where gamma = 1 and
    can hold a second local maximum near a = 1, hence the spread of starts.
    """
    if kind not in ("independent", "common", "cointegrated"):
        raise DomainError(f"unknown dependence kind {kind!r}")
    if tuple(d1.dates) != tuple(d2.dates):
        raise DomainError("series are not aligned on the same dates")
    dt_ = d1.dt
    u1, u2 = np.asarray(d1.u, dtype=float), np.asarray(d2.u, dtype=float)
    if u1.size < MIN_FIT_LENGTH:
        raise FitError(f"need at least {MIN_FIT_LENGTH} observations, got {u1.size}")
    lam_cap = min(theta1.lam, theta2.lam)
    names = _joint_names(kind)

    def law_for(a, lam_c):
        return JumpLaw(kind, theta1.lam, theta2.lam, a=a, lambda_common=lam_c)

    def objective(x):
        rho_w, rho_d, a, lam_c = _joint_unpack(x, kind, lam_cap)
        try:
            probs = step_probs(law_for(a, lam_c), dt_)
            return -joint_log_likelihood(u1, u2, theta1, theta2, rho_w, rho_d, probs, dt_, clock)
        except (DomainError, FloatingPointError):
            return 1e300

    e1 = u1[1:] - (1.0 - theta1.k * dt_) * u1[:-1]
    e2 = u2[1:] - (1.0 - theta2.k * dt_) * u2[:-1]
    r0 = float(np.clip(np.corrcoef(e1, e2)[0, 1], -0.95, 0.95)) if e1.std() > 0 and e2.std() > 0 else 0.0
    gen = _rng.block_generator(seed, 0)
    dim = len(names)
    # coupling grid at a (or lambda_common / cap) = 0.15, 0.5, 0.85, then random draws
    starts = [np.array([math.atanh(r0), math.atanh(r0), c][:dim]) for c in (0.0, -1.7346, 1.7346)]
    starts = starts[: 1 if dim == 2 else 3]
    while len(starts) < max(n_starts, 1):
        draw = gen.uniform(-1.0, 1.0, dim)
        starts.append(np.concatenate([np.arctanh(0.9 * draw[:2]), 4.0 * draw[2:]]))
    bounds = [(-_RHO_CAP, _RHO_CAP)] * 2 + [(-_LOGIT_CAP, _LOGIT_CAP)] * (dim - 2)

    results = []
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        for x0 in starts:
            res = minimize(objective, x0, method="L-BFGS-B", bounds=bounds,
                           options={"maxiter": 500, "ftol": 1e-13, "gtol": 1e-9})
            if np.isfinite(res.fun) and res.fun < 1e299:
                results.append(res)
    if not results:
        raise FitError("joint likelihood could not be evaluated at any start")
    ok = [r for r in results if r.success]
    best = min(ok or results, key=lambda r: r.fun)
    rho_w, rho_d, a, lam_c = _joint_unpack(best.x, kind, lam_cap)
    active, notes = [], []
    for name, value, (lo, hi) in zip(names, best.x, bounds):
        if value - lo < 1e-3:
            active.append(f"{name}_lower")
        if hi - value < 1e-3:
            active.append(f"{name}_upper")
    if "lambda_common_lower" in active:
        lam_c = 0.0
        notes.append("common intensity at its lower bound 0; the unconstrained optimum may be negative")
    if "a_lower" in active:
        a = 0.0
    if not ok:
        notes.append("optimizer did not report convergence from any start")
    return CalibrationResult(
        theta1, theta2, kind, rho_w, rho_d,
        a if kind == "cointegrated" else None,
        lam_c if kind == "common" else None,
        -float(best.fun), bool(ok), tuple(active), tuple(notes), len(ok),
        tuple(-float(r.fun) for r in results),
    )


# ---- synthetic data ------------------------------------------------------------------------------

def simulate_pair(theta1: Theta, theta2: Theta, rho_w: float, rho_d: float, law: JumpLaw, n_steps: int,
                  dt: float, seed: int, clock: str = "local") -> tuple[np.ndarray, np.ndarray]:
    """Euler paths of two OU-plus-jump log-prices from the same model the likelihood uses.

    Jump indicators are drawn jointly from the one-step law of ``law``; jump
    sizes are Gaussian with correlation ``rho_d`` when both legs jump.
    """
    probs = step_probs(law, dt).as_array()
    gen = _rng.block_generator(seed, 0)
    outcome = gen.choice(4, size=n_steps, p=probs / probs.sum())
    jump1 = (outcome == 2) | (outcome == 3)
    jump2 = (outcome == 1) | (outcome == 3)
    z1 = gen.standard_normal(n_steps)
    z2 = rho_w * z1 + math.sqrt(1.0 - rho_w ** 2) * gen.standard_normal(n_steps)
    y1 = gen.standard_normal(n_steps)
    y2 = rho_d * y1 + math.sqrt(1.0 - rho_d ** 2) * gen.standard_normal(n_steps)
    d1 = _damping(theta1.k, n_steps, dt, clock)
    d2 = _damping(theta2.k, n_steps, dt, clock)
    u1 = np.zeros(n_steps + 1)
    u2 = np.zeros(n_steps + 1)
    inc1 = theta1.sigma * math.sqrt(dt) * z1 + jump1 * d1 * (theta1.jump_m + theta1.jump_nu * y1)
    inc2 = theta2.sigma * math.sqrt(dt) * z2 + jump2 * d2 * (theta2.jump_m + theta2.jump_nu * y2)
    a1, a2 = 1.0 - theta1.k * dt, 1.0 - theta2.k * dt
    for i in range(n_steps):
        u1[i + 1] = a1 * u1[i] + inc1[i]
        u2[i + 1] = a2 * u2[i] + inc2[i]
    return u1, u2


def simulate_single(theta: Theta, n_steps: int, dt: float, seed: int, clock: str = "local") -> np.ndarray:
    law = JumpLaw("independent", theta.lam, 0.0)
    return simulate_pair(theta, theta, 0.0, 0.0, law, n_steps, dt, seed, clock)[0]


def price_series_from_residuals(u: np.ndarray, start: dt.date, level: float,
                                weekday_effects: tuple[float, ...] = (0.0,) * 7,
                                dt_years: float = 1.0 / DAY_COUNT) -> PriceSeries:
    """Daily prices exp(level + weekday effect + u) from ``start`` onward."""
    dates = tuple(start + dt.timedelta(days=i) for i in range(len(u)))
    logp = level + np.array([weekday_effects[d.weekday()] for d in dates]) + np.asarray(u)
    return PriceSeries(dates, np.exp(logp), dt_years)


def write_summary_csv(results: list[CalibrationResult], path: str | Path, comments: tuple[str, ...] = ()) -> None:
    rows = [r.summary_row() for r in results]
    with open(path, "w", newline="") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: ("" if v is None else repr(v) if isinstance(v, float) else v) for k, v in row.items()})
