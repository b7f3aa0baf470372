"""Compare median intervals on one heavy-tailed sample and one flat-at-the-median sample.

    python3 demos/median_intervals.py
"""

import numpy as np

from medquant.baselines import bootstrap_ci, subsample_ci, wald_ci
from medquant.medci import Sample, median_ci_exact, median_ci_hoeffding
from medquant.sim import sample_frho


def show(label, sample):
    print(f"{label} (n={sample.n})")
    for ci in (
        median_ci_exact(sample, 0.05),
        median_ci_hoeffding(sample, 0.05),
        wald_ci(sample, 0.05),
        bootstrap_ci(sample, 0.05, seed=1),
        subsample_ci(sample, 0.05, seed=1),
    ):
        print(f"  {ci.method.value:>15}  [{ci.lower: .4f}, {ci.upper: .4f}]  width {ci.width:.4f}")


if __name__ == "__main__":
    show("Cauchy", Sample(np.random.default_rng(0).standard_cauchy(400)))
    # density vanishes at the median, so the median converges at rate n^(-1/10)
    show("F_5", sample_frho(5.0, 400, 0))
