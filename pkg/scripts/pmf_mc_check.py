"""Compare sampled count pairs with the exact joint pmf: cellwise z-scores and a pooled chi-square."""
import argparse

import numpy as np
from scipy.stats import chi2

from cointjump.bipoisson import JumpLaw, sample_counts


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lambda1", type=float, default=20.0)
    ap.add_argument("--lambda2", type=float, default=20.0)
    ap.add_argument("--a", type=float, default=0.5)
    ap.add_argument("--t", type=float, default=1.0)
    ap.add_argument("--paths", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    law = JumpLaw("cointegrated", args.lambda1, args.lambda2, a=args.a)
    pmf = law.pmf(args.t)
    n1, n2 = sample_counts(law, args.t, args.paths, args.seed)
    inside = (n1 <= pmf.m_max) & (n2 <= pmf.n_max)
    obs = np.zeros_like(pmf.probs)
    np.add.at(obs, (n1[inside], n2[inside]), 1)
    exp = args.paths * pmf.probs
    se = np.sqrt(args.paths * pmf.probs * (1 - pmf.probs))
    live = exp > 0
    z = np.zeros_like(exp)
    z[live] = (obs[live] - exp[live]) / se[live]
    populated = exp >= 5
    stat = float((((obs - exp) ** 2)[populated] / exp[populated]).sum())
    dof = int(populated.sum()) - 1
    print(f"cells with positive mass: {int(live.sum())}, beyond 3 SE: {int((np.abs(z) > 3).sum())}")
    print(f"populated cells: {int(populated.sum())}, beyond 3 SE: {int((np.abs(z[populated]) > 3).sum())} "
          f"(chance level {populated.sum() * 0.0027:.1f})")
    print(f"pooled chi-square {stat:.1f} on {dof} dof, p = {chi2.sf(stat, dof):.3f}")
    print(f"sample corr {np.corrcoef(n1, n2)[0, 1]:.4f} vs exact {pmf.correlation():.4f}")


if __name__ == "__main__":
    main()
