"""Published reference values and parameter sets used by ``cointjump reproduce`` and the tests.

Spread values are for a zero-strike exchange option with T = 1 on two Merton
legs (S1(0) = S2(0) = 100, r = 0).
"""
from __future__ import annotations

from .calibration import Theta

# (a, rho %, lambda_common, common value, cointegrated value) per case
TABLE3 = {
    "A": (
        (0.10, 9, 1.80, 24.30, 24.22),
        (0.15, 14, 2.71, 23.76, 23.64),
        (0.20, 18, 3.63, 23.20, 23.05),
        (0.25, 23, 4.55, 22.63, 22.44),
        (0.30, 27, 5.47, 22.04, 21.81),
        (0.35, 32, 6.40, 21.42, 21.16),
        (0.40, 37, 7.34, 20.78, 20.48),
        (0.45, 41, 8.29, 20.11, 19.78),
        (0.50, 46, 9.24, 19.41, 19.05),
        (0.55, 51, 10.20, 18.68, 18.29),
        (0.60, 56, 11.17, 17.90, 17.49),
        (0.65, 61, 12.16, 17.08, 16.64),
        (0.70, 66, 13.15, 16.20, 15.74),
        (0.75, 71, 14.17, 15.25, 14.78),
        (0.80, 76, 15.20, 14.21, 13.75),
        (0.85, 81, 16.26, 13.06, 12.61),
        (0.90, 87, 17.36, 11.74, 11.33),
        (0.95, 93, 18.53, 10.14, 9.82),
    ),
    "B": (
        (0.10, 7, 2.09, 18.87, 18.87),
        (0.15, 11, 3.13, 18.66, 18.67),
        (0.20, 15, 4.16, 18.45, 18.46),
        (0.25, 18, 5.19, 18.25, 18.26),
        (0.30, 22, 6.21, 18.04, 18.05),
        (0.35, 26, 7.23, 17.83, 17.83),
        (0.40, 29, 8.24, 17.61, 17.62),
        (0.45, 33, 9.25, 17.40, 17.40),
        (0.50, 36, 10.25, 17.18, 17.18),
        (0.55, 40, 11.25, 16.97, 16.96),
        (0.60, 43, 12.24, 16.75, 16.74),
        (0.65, 47, 13.23, 16.53, 16.51),
        (0.70, 50, 14.21, 16.30, 16.29),
        (0.75, 54, 15.19, 16.08, 16.06),
        (0.80, 57, 16.16, 15.85, 15.83),
        (0.85, 61, 17.13, 15.62, 15.60),
        (0.90, 64, 18.09, 15.38, 15.37),
        (0.95, 67, 19.05, 15.15, 15.14),
    ),
}
TABLE3_TOL = 0.10
TABLE3_RHO_TOL = 1.0  # percentage points

# name -> (value, tolerance)
TABLE2 = {
    "nojump_caseA": (7.27, 0.05),
    "nojump_caseB": (11.92, 0.20),
    "independent_caseA": (25.23, 0.20),
    "independent_caseB": (19.27, 0.20),
}

# jump-diffusion legs shared by the spread experiments
CASES = {
    "A": dict(sigma1=0.20, sigma2=0.15, rho_w=0.80, rho_d=0.99, lambda1=20.0, lambda2=20.0,
              nu1=0.10, nu2=0.07, m1=1.10, m2=1.10),
    "B": dict(sigma1=0.20, sigma2=0.15, rho_w=0.80, rho_d=0.50, lambda1=40.0, lambda2=20.0,
              nu1=0.05, nu2=0.04, m1=1.05, m2=1.05),
}
# diffusion-only inputs chosen to match the average spread variance of each case
NOJUMP = {
    "A": dict(sigma1=0.49, sigma2=0.35, rho_w=0.96),
    "B": dict(sigma1=0.37, sigma2=0.23, rho_w=0.60),
}

# fitted day-ahead parameters: German (EEX) and French (Powernext) markets
EEX = Theta(k=42.50, sigma=1.66, lam=95.32, jump_m=-0.10, jump_nu=0.16)
POWERNEXT = Theta(k=41.64, sigma=1.52, lam=56.74, jump_m=-0.06, jump_nu=0.38)
FITTED_RHO_W = 0.43
FITTED_RHO_D = 0.0
FITTED_A = 0.44

FIG1_A_VALUES = (0.1, 0.5, 0.9)
FIG1_REL_TOL = 0.01
FIG2_A = 0.9
