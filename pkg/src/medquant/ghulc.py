"""Split-and-rank intervals for a generic parameter.

The data are split into ``B`` random blocks, an estimator is run on each
block, and an order-statistic interval for the median of the block estimates
is returned.  With ``B`` above the minimal ``ceil(log2(2/alpha))`` the band
radius is randomized between two neighbouring values so the nominal coverage
is met exactly for median-unbiased estimators.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

from ._rng import make_rng
from .binom import c_n_alpha, cached_dist, check_alpha, nontrivial_sample_size
from .errors import PreconditionError
from .medci import ConfidenceInterval, Method

__all__ = [
    "EstimatorProcedure",
    "GhulcConfig",
    "min_blocks",
    "p_n_k",
    "randomization_tau",
    "split_blocks",
    "ghulc_ci",
    "hulc_ci",
    "miscoverage_bound",
    "MiscoverageBound",
    "ghulc_width_bound",
    "empirical_median_bias",
    "median_estimator",
]


class EstimatorProcedure(Protocol):
    def __call__(self, block: np.ndarray) -> float: ...


def median_estimator(block: np.ndarray) -> float:
    """Sample median (midpoint for even sizes) of a 1-d block."""
    return float(np.median(block))


def min_blocks(alpha: float) -> int:
    """``ceil(log2(2/alpha))``, computed without floating-point log."""
    alpha = check_alpha(alpha)
    b = 1
    while not nontrivial_sample_size(b, alpha):
        b += 1
    return b


def _band_mass(n: int, k: int) -> float:
    if k < 0:
        return 0.0
    return cached_dist(n).central_mass(k)


def p_n_k(n: int, k: int) -> float:
    """``P(floor(n/2) - k <= Y <= ceil(n/2) + k)`` for ``Y ~ Bin(n, 1/2)``.

    >>> p_n_k(6, 2)
    0.96875
    """
    if not 0 <= k <= n // 2:
        raise ValueError(f"k must lie in [0, floor(n/2)], got k={k}, n={n}")
    return _band_mass(n, k)


def randomization_tau(n_blocks: int, alpha: float) -> tuple[int, float]:
    """Band radius ``c`` and the probability ``tau`` of shrinking it to ``c - 1``."""
    c = c_n_alpha(n_blocks, alpha)
    hi, lo = _band_mass(n_blocks, c), _band_mass(n_blocks, c - 1)
    if hi == lo:
        return c, 0.0
    tau = (hi - (1.0 - alpha)) / (hi - lo)
    return c, min(max(tau, 0.0), 1.0)


@dataclass(frozen=True)
class GhulcConfig:
    alpha: float
    n_blocks: int
    seed: int = 0

    def __post_init__(self):
        check_alpha(self.alpha)
        if self.n_blocks < 1:
            raise ValueError("n_blocks must be positive")
        need = min_blocks(self.alpha)
        if self.n_blocks < need:
            raise PreconditionError(f"B={self.n_blocks} is below ceil(log2(2/alpha))={need}")


def split_blocks(n_obs: int, n_blocks: int, seed, *keys) -> list[np.ndarray]:
    """Seeded partition of ``range(n_obs)`` into blocks whose sizes differ by at most one.

    The first ``n_obs mod n_blocks`` blocks get the extra element; indices
    within each block are sorted.
    """
    if n_blocks > n_obs:
        raise PreconditionError(f"cannot split {n_obs} observations into {n_blocks} blocks")
    perm = make_rng(seed, "split", *keys).permutation(n_obs)
    return [np.sort(b) for b in np.array_split(perm, n_blocks)]


def _block_estimates(data, blocks, proc, workers: int | None) -> np.ndarray:
    data = np.asarray(data)
    slices = [data[idx] for idx in blocks]
    if workers is None or workers <= 1:
        out = [proc(s) for s in slices]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(proc, slices))
    est = np.asarray(out, dtype=float)
    if np.isnan(est).any():
        raise ValueError("estimator returned NaN on some block")
    return est


def ghulc_ci(
    data,
    config: GhulcConfig,
    proc: EstimatorProcedure = median_estimator,
    *,
    workers: int | None = None,
) -> ConfidenceInterval:
    """Randomized order-statistic interval over ``B`` block estimates.

    ``data`` is indexed along its first axis, so rows may be multivariate
    records.  The split and the randomization draw come from separate
    streams of ``config.seed``; ``workers`` only parallelizes the block
    estimates and never changes the result.
    """
    n_obs = len(data)
    B, alpha = config.n_blocks, config.alpha
    blocks = split_blocks(n_obs, B, config.seed)
    est = np.sort(_block_estimates(data, blocks, proc, workers), kind="stable")
    c, tau = randomization_tau(B, alpha)
    u = float(make_rng(config.seed, "tau").random())
    c_star = c - 1 if u <= tau else c
    r, s = B // 2 - c_star, (B + 1) // 2 + c_star + 1
    if not (1 <= r < s <= B):
        raise PreconditionError(f"band radius {c_star} gives indices ({r}, {s}) outside [1, {B}]")
    return ConfidenceInterval(
        float(est[r - 1]), float(est[s - 1]), alpha, Method.GHULC, (r, s),
        info={"B": B, "c": c, "c_star": c_star, "tau": tau, "u": u, "estimates": est},
    )


def hulc_ci(data, alpha: float, proc: EstimatorProcedure = median_estimator, seed=0, *, workers=None) -> ConfidenceInterval:
    """Range of ``ceil(log2(2/alpha))`` block estimates."""
    B = min_blocks(alpha)
    blocks = split_blocks(len(data), B, seed)
    est = _block_estimates(data, blocks, proc, workers)
    return ConfidenceInterval(
        float(est.min()), float(est.max()), alpha, Method.HULC, (1, B),
        info={"B": B, "estimates": np.sort(est)},
    )


@dataclass(frozen=True)
class MiscoverageBound:
    tight: float
    loose: float


def miscoverage_bound(n_blocks: int, alpha: float, med_bias: float) -> MiscoverageBound:
    """Upper bounds on the miscoverage when each block estimate has median bias at most ``med_bias``."""
    if not 0.0 <= med_bias <= 0.5:
        raise ValueError("med_bias must lie in [0, 1/2]")
    alpha = check_alpha(alpha)
    B, e = n_blocks, med_bias
    tight = alpha * (1.0 + 2.0 * B * (B - 1) * e * e * (1.0 + 2.0 * e) ** (B - 2))
    loose = alpha * (1.0 + 2.0 * B * B * e * e * math.exp(2.0 * B * e))
    return MiscoverageBound(tight, loose)


def ghulc_width_bound(
    n_blocks: int,
    alpha: float,
    delta_prob: float,
    rho: float,
    c_script: float,
    rate: float,
    med_bias: float,
) -> float:
    """High-probability width bound when block estimates have local growth ``c_script |x|^rho``."""
    alpha = check_alpha(alpha)
    delta_prob = check_alpha(delta_prob)
    for name, v in (("rho", rho), ("c_script", c_script), ("rate", rate), ("n_blocks", n_blocks)):
        if not v > 0:
            raise ValueError(f"{name} must be positive")
    if med_bias < 0:
        raise ValueError("med_bias must be nonnegative")
    B = n_blocks
    inner = (5.0 * math.log(2.0 / delta_prob) + math.sqrt(2.0 * math.log(2.0 / alpha))) / (2.0 * math.sqrt(B))
    inner += 2.0 / B + med_bias
    return 2.0 / (c_script ** (1.0 / rho) * rate) * inner ** (1.0 / rho)


def empirical_median_bias(estimates: Sequence[float], theta0: float) -> float:
    """``(1/2 - min(P(est >= theta0), P(est <= theta0)))_+`` over a Monte Carlo sample."""
    est = np.asarray(estimates, dtype=float)
    if est.size == 0:
        raise ValueError("need at least one estimate")
    above = np.mean(est >= theta0)
    below = np.mean(est <= theta0)
    return max(0.5 - min(above, below), 0.0)
