"""Run configuration: a YAML document validated against a strict schema.

Sections: ``dependence``, ``model``, ``option``, ``numerics``, ``io`` and, for
the ``calibrate`` command, ``calibration``. Unknown keys anywhere are
rejected. Relative paths resolve against the config file's directory.
"""
from __future__ import annotations

import datetime as dt
import hashlib
import json
from pathlib import Path
from typing import Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import ConfigError
from .models import Coupling, ForwardCurve, GouLeg, GouMarket, MertonLeg, MertonMarket, SSMarket


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class DependenceConfig(_Strict):
    kind: Literal["independent", "common", "cointegrated"]
    lambda1: float = Field(ge=0)
    lambda2: float = Field(ge=0)
    a: float | None = Field(default=None, ge=0, le=1)
    lambda_common: float | None = Field(default=None, ge=0)
    # batch mode: cointegrated at each a next to a common-jump law with matched correlation
    a_grid: list[float] | None = None
    lambda_common_grid: list[float] | None = None

    @model_validator(mode="after")
    def _check(self):
        if self.a_grid is None:
            if self.kind == "cointegrated" and self.a is None:
                raise ValueError("cointegrated dependence needs 'a'")
            if self.kind == "common" and self.lambda_common is None:
                raise ValueError("common dependence needs 'lambda_common'")
        else:
            if any(not 0 <= a <= 1 for a in self.a_grid):
                raise ValueError("a_grid values must lie in [0, 1]")
            if self.lambda_common_grid is not None and len(self.lambda_common_grid) != len(self.a_grid):
                raise ValueError("lambda_common_grid must match a_grid in length")
        return self

    def coupling(self) -> Coupling:
        return Coupling(self.kind, a=self.a or 0.0, lambda_common=self.lambda_common or 0.0)


class CurveConfig(_Strict):
    flat: float | None = Field(default=None, gt=0)
    csv: str | None = None
    valuation_date: dt.date | None = None
    interpolation: Literal["step", "linear"] = "step"

    @model_validator(mode="after")
    def _check(self):
        if (self.flat is None) == (self.csv is None):
            raise ValueError("give exactly one of 'flat' or 'csv'")
        if self.csv is not None and self.valuation_date is None:
            raise ValueError("a csv curve needs 'valuation_date'")
        return self

    def build(self, base: Path) -> ForwardCurve:
        if self.flat is not None:
            return ForwardCurve.flat(self.flat)
        return ForwardCurve.from_csv(base / self.csv, self.valuation_date, self.interpolation)


class LegConfig(_Strict):
    sigma: float = Field(ge=0)
    jump_m: float
    jump_nu: float = Field(ge=0)
    s0: float | None = Field(default=None, gt=0)
    fwd: CurveConfig | None = None
    k: float | None = Field(default=None, gt=0)


class SSConfig(_Strict):
    fwd: CurveConfig
    k: float = Field(gt=0)
    sigma1: float = Field(ge=0)
    sigma2: float = Field(ge=0)
    rho: float = Field(ge=-1, le=1)
    mu: float = 0.0
    jump_m: float
    jump_nu: float = Field(ge=0)


class ModelConfig(_Strict):
    kind: Literal["merton", "gou", "ss"]
    legs: list[LegConfig] | None = None
    ss: SSConfig | None = None
    rho_w: float = Field(default=0.0, ge=-1, le=1)
    rho_d: float = Field(default=0.0, ge=-1, le=1)
    r: float = 0.0

    @model_validator(mode="after")
    def _check(self):
        if self.kind == "ss":
            if self.ss is None or self.legs is not None:
                raise ValueError("model kind 'ss' needs an 'ss' block and no 'legs'")
            return self
        if self.ss is not None or not self.legs or len(self.legs) > 2:
            raise ValueError(f"model kind {self.kind!r} needs one or two 'legs'")
        for i, leg in enumerate(self.legs):
            if self.kind == "merton" and (leg.s0 is None or leg.fwd is not None or leg.k is not None):
                raise ValueError(f"legs[{i}]: merton legs take 's0' and no 'fwd' or 'k'")
            if self.kind == "gou" and (leg.fwd is None or leg.k is None or leg.s0 is not None):
                raise ValueError(f"legs[{i}]: gou legs take 'fwd' and 'k' and no 's0'")
        return self


class OptionConfig(_Strict):
    kind: Literal["call", "put", "spread", "interconnector", "none"] = "none"
    strike: float = Field(default=0.0, ge=0)
    maturity: float | None = Field(default=None, gt=0)
    long_leg: Literal[1, 2] = 1
    valuation_date: dt.date | None = None
    delivery_start: dt.date | None = None
    delivery_end: dt.date | None = None

    @model_validator(mode="after")
    def _check(self):
        if self.kind == "interconnector":
            if None in (self.valuation_date, self.delivery_start, self.delivery_end):
                raise ValueError("interconnector needs valuation_date, delivery_start and delivery_end")
            if self.delivery_end < self.delivery_start:
                raise ValueError("delivery_end precedes delivery_start")
        elif self.maturity is None:
            raise ValueError("option needs 'maturity' (years)")
        return self

    def delivery_days(self) -> list[dt.date]:
        n = (self.delivery_end - self.delivery_start).days + 1
        return [self.delivery_start + dt.timedelta(days=i) for i in range(n)]


class NumericsConfig(_Strict):
    tail_tol: float = Field(default=1e-10, gt=0, le=1e-4)
    max_error: float = Field(default=1e-6, gt=0)
    n_paths: int = Field(default=0, ge=0)
    seed: int = Field(default=0, ge=0)


class IOConfig(_Strict):
    input1: str | None = None
    input2: str | None = None
    # synthetic series generation
    start_date: dt.date | None = None
    n_days: int | None = Field(default=None, gt=1)
    level1: float = 0.0
    level2: float = 0.0


class ThetaConfig(_Strict):
    k: float = Field(gt=0)
    sigma: float = Field(gt=0)
    lam: float = Field(ge=0)
    jump_m: float
    jump_nu: float = Field(ge=0)


class CalibrationConfig(_Strict):
    kinds: list[Literal["independent", "common", "cointegrated"]] = ["cointegrated"]
    clock: Literal["local", "absolute"] = "local"
    n_starts: int = Field(default=8, ge=1)
    month_effects: bool = True
    # parameters for the simulate command's synthetic series
    theta1: ThetaConfig | None = None
    theta2: ThetaConfig | None = None


class RunConfig(_Strict):
    dependence: DependenceConfig | None = None
    model: ModelConfig | None = None
    option: OptionConfig | None = None
    numerics: NumericsConfig = NumericsConfig()
    io: IOConfig = IOConfig()
    calibration: CalibrationConfig | None = None

    def config_hash(self) -> str:
        canonical = json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()[:16]

    def with_overrides(self, seed: int | None = None, n_paths: int | None = None,
                       tail_tol: float | None = None) -> RunConfig:
        upd = {k: v for k, v in (("seed", seed), ("n_paths", n_paths), ("tail_tol", tail_tol)) if v is not None}
        if not upd:
            return self
        data = self.model_dump()
        data["numerics"].update(upd)
        return validate_config(data)

    def build_model(self, base: Path):
        """Market or single-asset model described by the ``model`` and ``dependence`` sections."""
        m, dep = self.model, self.dependence
        if m is None or dep is None:
            raise ConfigError("pricing needs both 'model' and 'dependence' sections")
        coupling = dep.coupling()
        if m.kind == "ss":
            s = m.ss
            return SSMarket(s.fwd.build(base), s.k, s.sigma1, s.sigma2, s.rho, s.mu, s.jump_m, s.jump_nu,
                            dep.lambda1, dep.lambda2, coupling)
        lams = (dep.lambda1, dep.lambda2)
        if m.kind == "merton":
            legs = [MertonLeg(l.s0, l.sigma, lam, l.jump_m, l.jump_nu) for l, lam in zip(m.legs, lams)]
            if len(legs) == 1:
                return legs[0]
            return MertonMarket(legs[0], legs[1], m.rho_w, m.rho_d, m.r, coupling)
        legs = [GouLeg(l.fwd.build(base), l.k, l.sigma, lam, l.jump_m, l.jump_nu) for l, lam in zip(m.legs, lams)]
        if len(legs) == 1:
            return legs[0]
        return GouMarket(legs[0], legs[1], m.rho_w, m.rho_d, coupling)


def _format_error(exc: ValidationError) -> str:
    lines = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<root>"
        lines.append(f"{loc}: {err['msg']}")
    return "invalid configuration:\n  " + "\n  ".join(lines)


def validate_config(data: object) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a mapping of sections")
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_format_error(exc)) from None


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML: {exc}") from None
    return validate_config(data)
