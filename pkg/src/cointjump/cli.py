"""``cointjump`` command line: pmf export, simulation, pricing, calibration and table reproduction.

Exit codes: 0 success, 2 invalid input or configuration, 3 numerical or fit
failure, 4 reproduction mismatch.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict, replace
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__, reference
from .bipoisson import JumpLaw, sample_counts
from .calibration import (PriceSeries, Theta, deseasonalize, fit_joint, fit_single_asset,
                          price_series_from_residuals, simulate_pair)
from .config import CalibrationConfig, RunConfig, load_config
from .errors import CointJumpError, ConfigError, DomainError, NumericalError
from .models import Coupling, GouMarket, MertonMarket
from .pricing import (SpreadSpec, VanillaOption, dependence_comparison, mc_price, price_interconnector,
                      price_spread, price_vanilla)

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL, EXIT_MISMATCH = 0, 2, 3, 4
WEEKDAY_PATTERN = (0.03, 0.04, 0.04, 0.03, 0.01, -0.06, -0.09)  # Mon..Sun log-price offsets


class Mismatch(Exception):
    pass


def _header(cfg_hash: str) -> str:
    return f"cointjump v{__version__} config-hash={cfg_hash}"


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _write_rows(path: Path, header: str, rows: list[dict], comments: tuple[str, ...] = ()) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# {header}\n")
        for line in comments:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(rows[0]))
        for row in rows:
            writer.writerow([_fmt(v) for v in row.values()])


# ---- pmf --------------------------------------------------------------------------------

def _law(cfg: RunConfig) -> JumpLaw:
    if cfg.dependence is None:
        raise ConfigError("this command needs a 'dependence' section")
    d = cfg.dependence
    return JumpLaw(d.kind, d.lambda1, d.lambda2, a=d.a or 0.0, lambda_common=d.lambda_common or 0.0)


def _horizon(cfg: RunConfig) -> float:
    if cfg.option is None or cfg.option.maturity is None:
        raise ConfigError("option.maturity: horizon (years) is required")
    return cfg.option.maturity


def cmd_pmf(cfg: RunConfig, out: Path, base: Path) -> Path:
    law = _law(cfg)
    pmf = law.pmf(_horizon(cfg), cfg.numerics.tail_tol)
    path = out / "pmf.csv"
    meta = (f"kind={law.kind} lambda1={law.lambda1!r} lambda2={law.lambda2!r} a={law.a!r} "
            f"lambda_common={law.lambda_common!r}",)
    with open(path, "w", newline="") as fh:
        pmf.to_csv(fh, (_header(cfg.config_hash()),) + meta)
    print(f"wrote {path} ({pmf.m_max + 1}x{pmf.n_max + 1}, tail_mass={pmf.tail_mass:.3g})")
    return path


# ---- simulate -----------------------------------------------------------------------------

def _theta(t) -> Theta:
    return Theta(t.k, t.sigma, t.lam, t.jump_m, t.jump_nu)


def cmd_simulate(cfg: RunConfig, out: Path, base: Path) -> list[Path]:
    """Synthetic price series when ``calibration.theta1/theta2`` are set, else joint jump counts."""
    cal = cfg.calibration
    if cal is not None and cal.theta1 is not None:
        if cal.theta2 is None or cfg.io.start_date is None or cfg.io.n_days is None:
            raise ConfigError("synthetic series need calibration.theta2, io.start_date and io.n_days")
        th1, th2 = _theta(cal.theta1), _theta(cal.theta2)
        law = _law(cfg)
        if (law.lambda1, law.lambda2) != (th1.lam, th2.lam):
            raise ConfigError("dependence.lambda1/lambda2 must equal the jump intensities in theta1/theta2")
        rho_w = cfg.model.rho_w if cfg.model else 0.0
        rho_d = cfg.model.rho_d if cfg.model else 0.0
        u1, u2 = simulate_pair(th1, th2, rho_w, rho_d, law, cfg.io.n_days - 1, 1.0 / 365.0,
                               cfg.numerics.seed, cal.clock)
        paths = []
        for name, u, level in (("series1.csv", u1, cfg.io.level1), ("series2.csv", u2, cfg.io.level2)):
            series = price_series_from_residuals(u, cfg.io.start_date, level, WEEKDAY_PATTERN)
            path = out / name
            series.to_csv(path, (_header(cfg.config_hash()),))
            paths.append(path)
        print("wrote " + ", ".join(str(p) for p in paths))
        return paths
    law = _law(cfg)
    n_paths = cfg.numerics.n_paths
    if n_paths <= 0:
        raise ConfigError("numerics.n_paths (or --paths) must be positive for count simulation")
    t = _horizon(cfg)
    n1, n2 = sample_counts(law, t, n_paths, cfg.numerics.seed)
    path = out / "counts.csv"
    corr = float(np.corrcoef(n1, n2)[0, 1]) if n1.std() > 0 and n2.std() > 0 else float("nan")
    with open(path, "w", newline="") as fh:
        fh.write(f"# {_header(cfg.config_hash())}\n")
        fh.write(f"# t={t!r} mean1={float(n1.mean())!r} mean2={float(n2.mean())!r} corr={corr!r}\n")
        fh.write("path,n1,n2\n")
        for i, (x, y) in enumerate(zip(n1.tolist(), n2.tolist())):
            fh.write(f"{i},{x},{y}\n")
    print(f"wrote {path} ({n_paths} paths, corr={corr:.4f})")
    return [path]


# ---- price ---------------------------------------------------------------------------------

def _price_rows(cfg: RunConfig, base: Path) -> tuple[list[dict], tuple[str, ...]]:
    model = cfg.build_model(base)
    opt = cfg.option
    if opt is None or opt.kind == "none":
        raise ConfigError("option.kind must name an option to price")
    num = cfg.numerics
    r = cfg.model.r
    pair = isinstance(model, (MertonMarket, GouMarket))

    if cfg.dependence.a_grid is not None:
        if not pair or opt.kind != "spread":
            raise ConfigError("dependence.a_grid batch mode prices spreads on a two-leg model")
        spec = SpreadSpec(opt.maturity, long_leg=opt.long_leg)
        rows = []
        lam_grid = cfg.dependence.lambda_common_grid
        for i, a in enumerate(cfg.dependence.a_grid):
            cmp = dependence_comparison(model, spec, a, num.tail_tol)
            lam = cmp["lambda_common"] if lam_grid is None else lam_grid[i]
            common = price_spread(replace(model, coupling=Coupling("common", lambda_common=lam)), spec,
                                  num.tail_tol, num.max_error)
            coint = price_spread(replace(model, coupling=Coupling("cointegrated", a=a)), spec,
                                 num.tail_tol, num.max_error)
            rows.append(dict(a=a, kind="common", rho=cmp["rho"], lambda_common=lam, **common.to_dict()))
            rows.append(dict(a=a, kind="cointegrated", rho=cmp["rho"], lambda_common=None, **coint.to_dict()))
        return rows, ()

    if opt.kind in ("call", "put"):
        if pair:
            raise ConfigError("vanilla options need a single-leg or ss model")
        option = VanillaOption(opt.kind, opt.strike, opt.maturity)
        res = price_vanilla(model, option, r=r, tail_tol=num.tail_tol, max_error=num.max_error)
        row = dict(kind=opt.kind, **res.to_dict())
        if num.n_paths > 0:
            mc = mc_price(model, opt.kind, num.n_paths, num.seed, opt.maturity, opt.strike, r, num.tail_tol)
            row.update(mc_estimate=mc.estimate, mc_std_error=mc.std_error, mc_paths=mc.n_paths)
        return [row], ()

    if not pair:
        raise ConfigError(f"option kind {opt.kind!r} needs a two-leg model")
    if opt.kind == "spread":
        res = price_spread(model, SpreadSpec(opt.maturity, opt.strike, opt.long_leg), num.tail_tol, num.max_error)
        row = dict(kind="spread", **res.to_dict())
        if num.n_paths > 0:
            payoff = "spread" if opt.long_leg == 1 else "spread21"
            mc = mc_price(model, payoff, num.n_paths, num.seed, opt.maturity, 0.0, 0.0, num.tail_tol)
            row.update(mc_estimate=mc.estimate, mc_std_error=mc.std_error, mc_paths=mc.n_paths)
        return [row], ()

    if not isinstance(model, GouMarket):
        raise ConfigError("interconnector valuation needs a gou model")
    res = price_interconnector(model, opt.delivery_days(), opt.valuation_date, tail_tol=num.tail_tol,
                               max_error=num.max_error, long_leg=opt.long_leg)
    rows = [dict(day=d.isoformat(), value=v) for d, v in res.daily]
    comments = tuple(f"month {k} value={v!r}" for k, v in res.by_month.items())
    comments += (f"total value={res.total.value!r} trunc_bound={res.total.truncation_error_bound!r} "
                 f"delta1={res.total.delta1!r} delta2={res.total.delta2!r}",)
    return rows, comments


def cmd_price(cfg: RunConfig, out: Path, base: Path) -> Path:
    rows, comments = _price_rows(cfg, base)
    path = out / "price.csv"
    _write_rows(path, _header(cfg.config_hash()), rows, comments)
    for line in comments:
        print(line)
    if len(rows) <= 2:
        for row in rows:
            print(json.dumps(row, sort_keys=True))
    print(f"wrote {path}")
    return path


# ---- calibrate -------------------------------------------------------------------------------

def cmd_calibrate(cfg: RunConfig, out: Path, base: Path) -> list[Path]:
    io = cfg.io
    if io.input1 is None or io.input2 is None:
        raise ConfigError("io.input1 and io.input2 must name the two price files")
    cal = cfg.calibration or CalibrationConfig()
    s1 = PriceSeries.from_csv(base / io.input1)
    s2 = PriceSeries.from_csv(base / io.input2)
    if s1.dates != s2.dates:
        raise DomainError(f"{io.input1} and {io.input2} are not aligned on the same dates")
    d1, d2 = deseasonalize(s1, cal.month_effects), deseasonalize(s2, cal.month_effects)
    f1 = fit_single_asset(d1, n_starts=cal.n_starts, clock=cal.clock)
    f2 = fit_single_asset(d2, n_starts=cal.n_starts, clock=cal.clock)
    results = [fit_joint(d1, d2, f1.theta, f2.theta, kind, n_starts=cal.n_starts, clock=cal.clock,
                         seed=cfg.numerics.seed) for kind in cal.kinds]
    doc = {
        "version": __version__,
        "config_hash": cfg.config_hash(),
        "clock": cal.clock,
        "seasonal1": d1.coefficients,
        "seasonal2": d2.coefficients,
        "single": [
            {"theta": asdict(f.theta), "loglik": f.loglik, "converged": f.converged,
             "n_converged": f.n_converged, "at_bound": list(f.at_bound)} for f in (f1, f2)
        ],
        "joint": [r.to_dict() for r in results],
    }
    json_path = out / "calibration.json"
    json_path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=float) + "\n")
    csv_path = out / "calibration_summary.csv"
    _write_rows(csv_path, _header(cfg.config_hash()), [r.summary_row() for r in results])
    for r in results:
        line = f"{r.kind}: rho_w={r.rho_w:.4f} rho_d={r.rho_d:.4f}"
        if r.a is not None:
            line += f" a={r.a:.4f}"
        if r.lambda_common is not None:
            line += f" lambda_common={r.lambda_common:.4f}"
        print(line + f" loglik={r.loglik:.3f}")
        for flag in r.constraint_active:
            print(f"  boundary: {flag}", file=sys.stderr)
        for note in r.notes:
            print(f"  note: {note}", file=sys.stderr)
    for tag, f in (("1", f1), ("2", f2)):
        for flag in f.at_bound:
            print(f"  asset {tag} boundary: {flag}", file=sys.stderr)
    print(f"wrote {json_path}, {csv_path}")
    return [json_path, csv_path]


# ---- reproduce ---------------------------------------------------------------------------------

def _shipped_config(name: str) -> tuple[RunConfig, Path]:
    ref = resources.files("cointjump") / "configs" / name
    with resources.as_file(ref) as path:
        return load_config(path), path.parent


def _check(rows: list[dict], name: str, expected: float, computed: float, tol: float) -> None:
    ok = abs(computed - expected) <= tol
    rows.append(dict(name=name, expected=expected, computed=computed, tolerance=tol,
                     status="pass" if ok else "FAIL"))


def _reproduce_table2(rows: list[dict]) -> None:
    for name, (value, tol) in reference.TABLE2.items():
        cfg, base = _shipped_config(f"table2_{name}.yaml")
        res = price_spread(cfg.build_model(base), SpreadSpec(cfg.option.maturity), cfg.numerics.tail_tol)
        _check(rows, name, value, res.value, tol)


def _reproduce_table3(rows: list[dict], out: Path) -> None:
    for case in ("A", "B"):
        cfg, base = _shipped_config(f"table3_case{case}.yaml")
        batch, _ = _price_rows(cfg, base)
        _write_rows(out / f"table3_case{case}.csv", _header(cfg.config_hash()), batch)
        computed = {(row["a"], row["kind"]): row["value"] for row in batch}
        rhos = {row["a"]: row["rho"] for row in batch}
        for a, rho_pct, lam, common, coint in reference.TABLE3[case]:
            _check(rows, f"case{case} a={a:.2f} common", common, computed[(a, "common")], reference.TABLE3_TOL)
            _check(rows, f"case{case} a={a:.2f} cointegrated", coint, computed[(a, "cointegrated")],
                   reference.TABLE3_TOL)
            l1, l2 = cfg.dependence.lambda1, cfg.dependence.lambda2
            _check(rows, f"case{case} a={a:.2f} rho% common", rho_pct, 100 * lam / math.sqrt(l1 * l2),
                   reference.TABLE3_RHO_TOL)
            _check(rows, f"case{case} a={a:.2f} rho% cointegrated", rho_pct, 100 * rhos[a], reference.TABLE3_RHO_TOL)


def _reproduce_fig1(rows: list[dict], out: Path) -> None:
    for case in ("A", "B"):
        cfg, base = _shipped_config(f"fig1_case{case}.yaml")
        batch, _ = _price_rows(cfg, base)
        market = cfg.build_model(base)
        spec = SpreadSpec(cfg.option.maturity)
        indep = price_spread(replace(market, coupling=Coupling("independent")), spec, cfg.numerics.tail_tol).value
        batch.append(dict(a=None, kind="independent", rho=0.0, lambda_common=None, value=indep))
        _write_rows(out / f"fig1_case{case}.csv", _header(cfg.config_hash()),
                    [{k: row.get(k) for k in ("a", "kind", "rho", "lambda_common", "value")} for row in batch])
        for a in cfg.dependence.a_grid:
            values = [row["value"] for row in batch if row["a"] == a] + [indep]
            spread = (max(values) - min(values)) / min(values)
            _check(rows, f"case{case} a={a} relative spread of three kinds", 0.0, spread, reference.FIG1_REL_TOL)


def _reproduce_fig2(rows: list[dict], out: Path) -> None:
    for case in ("A", "B"):
        corr = {}
        for kind in ("common", "cointegrated"):
            cfg, base = _shipped_config(f"fig2_case{case}_{kind}.yaml")
            law = _law(cfg)
            t = _horizon(cfg)
            pmf = law.pmf(t, cfg.numerics.tail_tol)
            with open(out / f"fig2_case{case}_{kind}.csv", "w", newline="") as fh:
                pmf.to_csv(fh, (_header(cfg.config_hash()),))
            corr[kind] = pmf.correlation()
            total = float(pmf.probs.sum()) + pmf.tail_mass
            _check(rows, f"case{case} {kind} total mass", 1.0, total, 1e-8)
            if kind == "cointegrated" and law.a * law.lambda1 / law.lambda2 >= 1:
                upper = float(np.abs(np.triu(pmf.probs, 1)).max())
                _check(rows, f"case{case} cointegrated upper triangle", 0.0, upper, 0.0)
        _check(rows, f"case{case} correlation common vs cointegrated (%)", 100 * corr["cointegrated"],
               100 * corr["common"], reference.TABLE3_RHO_TOL)


def cmd_reproduce(target: str, out: Path) -> Path:
    rows: list[dict] = []
    if target == "table2":
        _reproduce_table2(rows)
    elif target == "table3":
        _reproduce_table3(rows, out)
    elif target == "fig1":
        _reproduce_fig1(rows, out)
    else:
        _reproduce_fig2(rows, out)
    path = out / f"{target}_report.csv"
    _write_rows(path, f"cointjump v{__version__} reproduce {target}", rows)
    failed = [r for r in rows if r["status"] != "pass"]
    print(f"{target}: {len(rows) - len(failed)}/{len(rows)} comparisons pass; report {path}")
    for r in failed:
        print(f"  MISMATCH {r['name']}: expected {r['expected']} computed {r['computed']!r} "
              f"(tol {r['tolerance']})", file=sys.stderr)
    if failed:
        raise Mismatch(f"{len(failed)} comparisons failed")
    return path


# ---- entry point --------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cointjump", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"cointjump {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (("pmf", "export the joint jump-count pmf"),
                           ("simulate", "simulate jump counts or synthetic price series"),
                           ("price", "price a vanilla, spread or interconnector option"),
                           ("calibrate", "fit model parameters to two price series")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True, type=Path)
        p.add_argument("--out", type=Path, default=Path("."))
        p.add_argument("--seed", type=int)
        p.add_argument("--paths", type=int)
        p.add_argument("--tail-tol", type=float)
    p = sub.add_parser("reproduce", help="rerun a published table or figure and compare")
    p.add_argument("target", choices=("table2", "table3", "fig1", "fig2"))
    p.add_argument("--out", type=Path, default=Path("."))
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.out.mkdir(parents=True, exist_ok=True)
        if args.command == "reproduce":
            cmd_reproduce(args.target, args.out)
            return EXIT_OK
        cfg = load_config(args.config).with_overrides(args.seed, args.paths, args.tail_tol)
        base = args.config.resolve().parent
        {"pmf": cmd_pmf, "simulate": cmd_simulate, "price": cmd_price,
         "calibrate": cmd_calibrate}[args.command](cfg, args.out, base)
        return EXIT_OK
    except Mismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except NumericalError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        diag = getattr(exc, "diagnostics", None)
        if diag:
            print(f"diagnostics: {json.dumps(diag, default=str)}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (CointJumpError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
