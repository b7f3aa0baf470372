"""Scaled widths of the exact interval against their limiting law.

For rho = 1 the scaled width settles at z_{alpha/2}; for other rho it stays
random.  Prints quantiles of both samples and their KS distance.

    python3 demos/width_limit.py
"""

import numpy as np

from medquant.binom import z_half
from medquant.sim import ks_distance, run_width_limit_experiment

if __name__ == "__main__":
    print(f"z_(alpha/2) = {z_half(0.05):.4f}")
    for rho in (0.75, 1.0, 2.0, 10.0):
        for n in (1000, 100_000):
            widths, limit = run_width_limit_experiment(rho, 0.05, n, 1000, seed=3)
            qw = np.percentile(widths, [10, 50, 90])
            ql = np.percentile(limit, [10, 50, 90])
            print(
                f"rho={rho:<5} n={n:<7} empirical q10/50/90 = {np.round(qw, 3)}  "
                f"limit = {np.round(ql, 3)}  KS = {ks_distance(widths, limit):.3f}"
            )
