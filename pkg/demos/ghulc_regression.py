"""Split-and-rank intervals for a least-absolute-deviation slope.

HulC uses the minimal number of blocks; G-HulC uses more blocks and a
randomized band radius.  Widths shrink as the number of blocks grows.

    python3 demos/ghulc_regression.py
"""

import numpy as np

from medquant.sim import run_ghulc_experiment

if __name__ == "__main__":
    reports = run_ghulc_experiment([2048], [0.5, 1.0, 1.5], [24, 48, 96], 0.05, 300, seed=5)
    print(f"{'method':>6} {'beta':>5} {'B':>4} {'coverage':>9} {'median width':>13} {'IQR':>7}")
    for r in reports:
        q25, q50, q75 = np.percentile(r.widths, [25, 50, 75])
        b = r.n_blocks if r.n_blocks is not None else 6
        print(f"{r.method:>6} {r.shape_param:>5} {b:>4} {r.coverage:>9.3f} {q50:>13.3f} {q75 - q25:>7.3f}")
