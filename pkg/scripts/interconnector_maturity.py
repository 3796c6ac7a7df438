"""Interconnector value under cointegrated and independent jumps for deliveries further out.

Prints the monthly values for January to March and the second quarter of
2016 (valuation 31 Dec 2015) and the cointegrated-minus-independent gap.
"""
import datetime as dt
from dataclasses import replace

from cointjump import reference as R
from cointjump.models import Coupling, ForwardCurve, GouLeg, GouMarket
from cointjump.pricing import price_interconnector

VALUATION = dt.date(2015, 12, 31)
PERIODS = {
    "Jan": (dt.date(2016, 1, 1), dt.date(2016, 1, 31)),
    "Feb": (dt.date(2016, 2, 1), dt.date(2016, 2, 29)),
    "Mar": (dt.date(2016, 3, 1), dt.date(2016, 3, 31)),
    "Q2": (dt.date(2016, 4, 1), dt.date(2016, 6, 30)),
}


def days(start, end):
    return [start + dt.timedelta(days=i) for i in range((end - start).days + 1)]


def main():
    legs = [GouLeg(ForwardCurve.flat(30.0), t.k, t.sigma, t.lam, t.jump_m, t.jump_nu) for t in (R.EEX, R.POWERNEXT)]
    coint = GouMarket(legs[0], legs[1], R.FITTED_RHO_W, R.FITTED_RHO_D, Coupling("cointegrated", a=R.FITTED_A))
    indep = replace(coint, coupling=Coupling("independent"))
    print(f"{'period':8s} {'cointegrated':>14s} {'independent':>14s} {'gap':>12s}")
    for name, (start, end) in PERIODS.items():
        d = days(start, end)
        c = price_interconnector(coint, d, VALUATION, long_leg=2).total.value
        i = price_interconnector(indep, d, VALUATION, long_leg=2).total.value
        print(f"{name:8s} {c:14.6f} {i:14.6f} {c - i:12.3e}")


if __name__ == "__main__":
    main()
