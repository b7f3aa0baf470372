"""Distribution-free confidence intervals for the median built from order statistics."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .binom import cached_dist, c_n_alpha, check_alpha, nontrivial_sample_size

__all__ = [
    "Sample",
    "Method",
    "ConfidenceInterval",
    "exact_order_indices",
    "hoeffding_order_indices",
    "median_ci_exact",
    "median_ci_hoeffding",
    "coverage_lower_bound",
    "quantile_coverage_bound",
]


@dataclass(frozen=True, init=False)
class Sample:
    """Sorted, read-only, NaN-free univariate sample."""

    values: np.ndarray

    def __init__(self, values: Iterable[float]):
        arr = np.array(values, dtype=float).ravel()
        if arr.size == 0:
            raise ValueError("sample must contain at least one value")
        if np.isnan(arr).any():
            raise ValueError("sample contains NaN")
        arr = np.sort(arr, kind="stable")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return int(self.values.size)

    def order_stat(self, k: int) -> float:
        """``X_(k)`` with 1-based ``k``; -inf below 1 and +inf above ``n``."""
        if k < 1:
            return -math.inf
        if k > self.n:
            return math.inf
        return float(self.values[k - 1])

    def lower_median(self) -> float:
        return float(self.values[(self.n + 1) // 2 - 1])

    def __len__(self) -> int:
        return self.n


class Method(str, enum.Enum):
    EXACT = "ExactOrderStat"
    HOEFFDING = "Hoeffding"
    WALD = "Wald"
    BOOTSTRAP = "Bootstrap"
    SUBSAMPLE = "Subsample"
    GHULC = "GHulC"
    HULC = "HulC"


def _json_float(x: float):
    if math.isinf(x):
        return "+inf" if x > 0 else "-inf"
    return x


@dataclass(frozen=True)
class ConfidenceInterval:
    lower: float
    upper: float
    alpha: float
    method: Method
    order_indices: tuple[int, int] | None = None
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if math.isnan(self.lower) or math.isnan(self.upper):
            raise ValueError("interval endpoints must not be NaN")
        if self.lower > self.upper:
            raise ValueError(f"lower {self.lower} exceeds upper {self.upper}")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, theta: float) -> bool:
        return self.lower <= theta <= self.upper

    def to_dict(self) -> dict:
        out = {
            "method": self.method.value,
            "alpha": self.alpha,
            "lower": _json_float(self.lower),
            "upper": _json_float(self.upper),
            "width": _json_float(self.width),
        }
        if self.order_indices is not None:
            out["order_indices"] = list(self.order_indices)
        return out


def exact_order_indices(n: int, alpha: float) -> tuple[int, int] | None:
    """1-based ``(r, s)`` of the exact interval, or None when it is the real line."""
    check_alpha(alpha)
    if not nontrivial_sample_size(n, alpha):
        return None
    c = c_n_alpha(n, alpha)
    return n // 2 - c, (n + 1) // 2 + c + 1


def hoeffding_order_indices(n: int, alpha: float) -> tuple[int, int]:
    """Raw ``(r, s)``; indices outside ``[1, n]`` stand for infinite endpoints."""
    check_alpha(alpha)
    lam = math.sqrt(n * math.log(2.0 / alpha) / 2.0)
    return math.ceil(n / 2.0 - lam), math.floor(n / 2.0 + lam) + 1


def median_ci_exact(sample: Sample, alpha: float) -> ConfidenceInterval:
    """Closed order-statistic interval with coverage at least ``1 - alpha`` for any law.

    Returns the whole real line when ``n < log2(2/alpha)``, since no pair of
    order statistics can reach the target level then.

    >>> ci = median_ci_exact(Sample([3.0, 1.0, 4.0, 1.5, 5.0, 9.0]), 0.05)
    >>> ci.lower, ci.upper, ci.order_indices
    (1.0, 9.0, (1, 6))
    """
    if not isinstance(sample, Sample):
        sample = Sample(sample)
    alpha = check_alpha(alpha)
    idx = exact_order_indices(sample.n, alpha)
    if idx is None:
        return ConfidenceInterval(-math.inf, math.inf, alpha, Method.EXACT)
    r, s = idx
    return ConfidenceInterval(sample.order_stat(r), sample.order_stat(s), alpha, Method.EXACT, (r, s))


def median_ci_hoeffding(sample: Sample, alpha: float) -> ConfidenceInterval:
    """Smallest order-statistic interval containing the Hoeffding count band."""
    if not isinstance(sample, Sample):
        sample = Sample(sample)
    alpha = check_alpha(alpha)
    r, s = hoeffding_order_indices(sample.n, alpha)
    return ConfidenceInterval(sample.order_stat(r), sample.order_stat(s), alpha, Method.HOEFFDING, (r, s))


def coverage_lower_bound(n: int, r: int, s: int) -> float:
    """``sum_{i=r}^{s-1} C(n, i) / 2^n``, the coverage of ``[X_(r), X_(s)]`` for continuous F.

    ``s = n + 1`` denotes an open upper tail.
    """
    if not (1 <= r < s <= n + 1):
        raise ValueError(f"need 1 <= r < s <= n + 1, got r={r}, s={s}, n={n}")
    dist = cached_dist(n)
    return max(1.0 - (dist.cdf(r - 1) + dist.sf(s - 1)), 0.0)


def quantile_coverage_bound(n: int, alpha: float, epsilon: float) -> float:
    """Guaranteed coverage of every quantile level within ``epsilon`` of 1/2.

    May be negative, in which case the bound is vacuous.
    """
    if not 0.0 <= epsilon < 0.5:
        raise ValueError(f"epsilon must lie in [0, 1/2), got {epsilon!r}")
    alpha = check_alpha(alpha)
    return 1.0 - alpha - 2.0 * alpha * n * (n - 1) * (1.0 + 2.0 * epsilon) ** (n - 2) * epsilon**2
