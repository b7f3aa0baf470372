"""Comparator intervals: Wald with a kernel density variance, percentile bootstrap, subsampling."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._rng import make_rng
from .binom import check_alpha, z_half
from .errors import PreconditionError
from .medci import ConfidenceInterval, Method, Sample

__all__ = [
    "KdeSpec",
    "bw_nrd0",
    "kde_at",
    "wald_ci",
    "bootstrap_ci",
    "subsample_ci",
    "estimate_rate_exponent",
]

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def bw_nrd0(x, *, allow_fallback: bool = False) -> float:
    """Silverman's rule of thumb, with R's ``bw.nrd0`` conventions.

    ``0.9 * min(sd, IQR/1.34) * n^(-1/5)``, using ``sd`` alone when the IQR
    vanishes.  If the sample has no spread at all the bandwidth is zero;
    with ``allow_fallback`` it becomes ``|mean| * 1e-3`` instead.
    Raises :class:`PreconditionError` when no positive bandwidth results.
    """
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        raise PreconditionError("bandwidth rule needs at least two observations")
    # a constant sample can still show a rounding-level sd
    sd = float(np.std(x, ddof=1)) if np.ptp(x) > 0 else 0.0
    q75, q25 = np.quantile(x, [0.75, 0.25])
    lo = min(sd, float(q75 - q25) / 1.34)
    if lo <= 0.0:
        lo = sd
    if lo <= 0.0 and allow_fallback:
        lo = abs(float(np.mean(x))) * 1e-3
    bw = 0.9 * lo * x.size ** (-0.2)
    if not bw > 0.0:
        raise PreconditionError("zero bandwidth: sample has no spread, supply a bandwidth override")
    return bw


def kde_at(data, points, bandwidth: float, *, chunk: int = 2**22) -> np.ndarray:
    """Gaussian kernel density estimate of ``data`` evaluated at ``points``."""
    data = np.asarray(data, dtype=float).ravel()
    pts = np.atleast_1d(np.asarray(points, dtype=float))
    if not bandwidth > 0.0:
        raise ValueError("bandwidth must be positive")
    out = np.empty(pts.size)
    step = max(1, chunk // max(data.size, 1))
    for start in range(0, pts.size, step):
        p = pts[start : start + step, None]
        u = (p - data[None, :]) / bandwidth
        out[start : start + step] = np.exp(-0.5 * u * u).sum(axis=1)
    out *= _INV_SQRT_2PI / (data.size * bandwidth)
    return out


@dataclass(frozen=True)
class KdeSpec:
    """Gaussian kernel with the ``bw.nrd0`` rule unless a bandwidth is given."""

    bandwidth_override: float | None = None
    allow_fallback: bool = False

    def __post_init__(self):
        if self.bandwidth_override is not None and not self.bandwidth_override > 0.0:
            raise ValueError("bandwidth_override must be positive")

    def bandwidth(self, x) -> float:
        if self.bandwidth_override is not None:
            return float(self.bandwidth_override)
        return bw_nrd0(x, allow_fallback=self.allow_fallback)


def _as_sample(sample) -> Sample:
    return sample if isinstance(sample, Sample) else Sample(sample)


def wald_ci(sample, alpha: float, kde: KdeSpec = KdeSpec()) -> ConfidenceInterval:
    """``theta_hat -/+ sigma_hat z / sqrt(n)`` with ``sigma_hat = 1 / (2 f_hat(theta_hat))``.

    ``theta_hat`` is the lower sample median.
    """
    sample = _as_sample(sample)
    alpha = check_alpha(alpha)
    n = sample.n
    if n < 2:
        raise PreconditionError("Wald interval needs n >= 2")
    center = sample.lower_median()
    bw = kde.bandwidth(sample.values)
    dens = float(kde_at(sample.values, center, bw)[0])
    if not dens > 0.0:
        raise PreconditionError("kernel density at the median is zero")
    sigma = 1.0 / (2.0 * dens)
    half = sigma * z_half(alpha) / math.sqrt(n)
    return ConfidenceInterval(
        center - half, center + half, alpha, Method.WALD,
        info={"center": center, "sigma_hat": sigma, "bandwidth": bw},
    )


def _lower_medians(rows: np.ndarray) -> np.ndarray:
    k = (rows.shape[1] + 1) // 2 - 1
    return np.partition(rows, k, axis=1)[:, k]


def bootstrap_ci(sample, alpha: float, n_boot: int = 1000, seed=0) -> ConfidenceInterval:
    """Percentile bootstrap interval for the median.

    Endpoints are order statistics of the resampled lower medians
    (inverse-ECDF quantiles), so shifting the data shifts the interval exactly.
    """
    sample = _as_sample(sample)
    alpha = check_alpha(alpha)
    if n_boot < 100:
        raise ValueError("n_boot must be at least 100")
    n = sample.n
    if n < 2:
        raise PreconditionError("bootstrap needs n >= 2")
    rng = make_rng(seed, "bootstrap")
    idx = rng.integers(0, n, size=(n_boot, n))
    meds = _lower_medians(sample.values[idx])
    lo, hi = np.quantile(meds, [alpha / 2.0, 1.0 - alpha / 2.0], method="inverted_cdf")
    return ConfidenceInterval(float(lo), float(hi), alpha, Method.BOOTSTRAP, info={"n_boot": n_boot})


# symmetric quantile pairs whose spreads feed the rate regression
_RANGE_LEVELS = (0.05, 0.1, 0.15, 0.2, 0.25)


def _subsample_medians(values: np.ndarray, size: int, n_sub: int, rng) -> np.ndarray:
    keys = rng.random((n_sub, values.size))
    idx = np.argpartition(keys, size - 1, axis=1)[:, :size]
    return _lower_medians(values[idx])


def estimate_rate_exponent(spreads_by_size: dict[int, np.ndarray]) -> float:
    """Common slope of ``-log(spread)`` against ``log(size)`` across quantile levels.

    ``spreads_by_size`` maps a subsample size to interquantile ranges at the
    same set of levels.  Levels with a zero range at any size are dropped;
    with none left the root-n exponent 0.5 is returned.
    """
    sizes = sorted(spreads_by_size)
    spreads = np.array([spreads_by_size[b] for b in sizes], dtype=float)
    keep = np.all(spreads > 0.0, axis=0)
    if len(sizes) < 2 or not keep.any():
        return 0.5
    logs = np.log(spreads[:, keep])
    logb = np.log(np.asarray(sizes, dtype=float))
    # least squares with one intercept per level and a shared slope
    yc = logs - logs.mean(axis=0)
    xc = logb - logb.mean()
    denom = float(np.sum(xc * xc)) * logs.shape[1]
    if denom == 0.0:
        return 0.5
    slope = float(np.sum(xc[:, None] * yc)) / denom
    beta = -slope
    return beta if math.isfinite(beta) else 0.5


def subsample_ci(
    sample,
    alpha: float,
    block_fraction_exponent: float = 0.5,
    seed=0,
    n_sub: int = 1000,
) -> ConfidenceInterval:
    """Subsampling interval with an estimated convergence rate ``n^beta``.

    The rate exponent comes from the spread of subsample medians at sizes
    ``n^0.4`` and ``n^0.6``; the interval rescales the centred subsample
    medians at size ``n^block_fraction_exponent`` by ``(b/n)^beta``.
    """
    sample = _as_sample(sample)
    alpha = check_alpha(alpha)
    n = sample.n
    if n < 16:
        raise PreconditionError("subsampling needs n >= 16")
    if not 0.0 < block_fraction_exponent < 1.0:
        raise ValueError("block_fraction_exponent must lie in (0, 1)")
    x = sample.values
    theta = sample.lower_median()
    b = int(math.floor(n**block_fraction_exponent))
    b1, b2 = int(math.floor(n**0.4)), int(math.floor(n**0.6))
    levels = np.asarray(_RANGE_LEVELS)
    spreads = {}
    centred_at_b = None
    for size in sorted({b1, b2, b}):
        rng = make_rng(seed, "subsample", size)
        meds = _subsample_medians(x, size, n_sub, rng)
        if size in (b1, b2):
            hi = np.quantile(meds, 1.0 - levels, method="inverted_cdf")
            lo = np.quantile(meds, levels, method="inverted_cdf")
            spreads[size] = hi - lo
        if size == b:
            centred_at_b = meds - theta
    beta = estimate_rate_exponent(spreads)
    scale = (b / n) ** beta
    q_lo, q_hi = np.quantile(centred_at_b, [alpha / 2.0, 1.0 - alpha / 2.0], method="inverted_cdf")
    lower = theta - scale * float(q_hi)
    upper = theta - scale * float(q_lo)
    return ConfidenceInterval(
        lower, upper, alpha, Method.SUBSAMPLE,
        info={"rate_exponent": beta, "block_size": b, "sizes": (b1, b2)},
    )
