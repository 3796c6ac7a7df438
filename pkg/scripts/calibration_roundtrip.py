"""Simulate pairs from the fitted German/French parameters, refit, and report median recovery.

By default the fit runs on the simulated residuals. ``--deseasonalize`` first
adds a weekday pattern, converts to prices and strips it again by OLS, which
shows how much the seasonal step alone moves the estimates.
"""
import argparse
import datetime as dt

import numpy as np

from cointjump import reference as R
from cointjump.bipoisson import JumpLaw
from cointjump.calibration import (DeseasonalizedSeries, deseasonalize, fit_joint, fit_single_asset,
                                   price_series_from_residuals, simulate_pair)
from cointjump.cli import WEEKDAY_PATTERN

DT = 1.0 / 365.0
START = dt.date(2014, 1, 1)


def residual_series(u):
    dates = tuple(START + dt.timedelta(days=i) for i in range(len(u)))
    return DeseasonalizedSeries(dates, u, lambda d: 0.0, {}, DT)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--reps", type=int, default=10)
    ap.add_argument("--days", type=int, default=730)
    ap.add_argument("--seed", type=int, default=8000)
    ap.add_argument("--deseasonalize", action="store_true")
    ap.add_argument("--month-effects", action="store_true")
    args = ap.parse_args()

    law = JumpLaw("cointegrated", R.EEX.lam, R.POWERNEXT.lam, a=R.FITTED_A)
    rows = []
    for rep in range(args.reps):
        u1, u2 = simulate_pair(R.EEX, R.POWERNEXT, R.FITTED_RHO_W, R.FITTED_RHO_D, law, args.days - 1, DT,
                               seed=args.seed + rep)
        if args.deseasonalize:
            d1, d2 = (deseasonalize(price_series_from_residuals(u, START, 3.5, WEEKDAY_PATTERN),
                                    month_effects=args.month_effects) for u in (u1, u2))
        else:
            d1, d2 = residual_series(u1), residual_series(u2)
        t1, t2 = fit_single_asset(d1).theta, fit_single_asset(d2).theta
        res = fit_joint(d1, d2, t1, t2, "cointegrated", seed=rep)
        rows.append([t1.k, t1.sigma, t1.lam, t2.k, t2.sigma, t2.lam, res.rho_w, res.a])
        print(f"rep {rep:3d}  k1={t1.k:6.1f} sigma1={t1.sigma:5.2f} lam1={t1.lam:6.1f}  "
              f"k2={t2.k:6.1f} sigma2={t2.sigma:5.2f} lam2={t2.lam:6.1f}  rho_w={res.rho_w:5.2f} a={res.a:5.2f}")
    med = np.median(np.array(rows), axis=0)
    truth = [R.EEX.k, R.EEX.sigma, R.EEX.lam, R.POWERNEXT.k, R.POWERNEXT.sigma, R.POWERNEXT.lam,
             R.FITTED_RHO_W, R.FITTED_A]
    names = ["k1", "sigma1", "lam1", "k2", "sigma2", "lam2", "rho_w", "a"]
    print("\nparameter     truth    median")
    for n, t, m in zip(names, truth, med):
        print(f"{n:10s} {t:8.3f}  {m:8.3f}")


if __name__ == "__main__":
    main()
