"""Exact Bin(n, 1/2) computations and the normal special functions built on them.

Everything here is deterministic and side-effect free.  Probabilities of the
symmetric binomial are evaluated in log space so that ``n`` can be large
without overflow, and tail sums are always accumulated from the tail they
describe, which keeps small tail probabilities accurate in relative terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import special

__all__ = [
    "BinomialHalfDist",
    "QuantileSandwich",
    "binom_half_cdf",
    "binom_half_quantile",
    "c_n_alpha",
    "c_n_alpha_sandwich",
    "kl_bernoulli_half",
    "zubkov_bound",
    "normal_cdf",
    "normal_quantile",
    "check_alpha",
    "nontrivial_sample_size",
    "z_half",
    "zubkov_argument",
    "cached_dist",
]

LN2 = math.log(2.0)


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    return alpha


def _check_n(n: int) -> int:
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    return int(n)


def nontrivial_sample_size(n: int, alpha: float) -> bool:
    """True when ``n >= log2(2/alpha)``, i.e. ``2**n * alpha >= 2``.

    Compared in log space with exact handling of the boundary so that
    e.g. ``n=2, alpha=0.5`` counts as nontrivial.
    """
    # 1 - 2**(1-n) >= 1 - alpha  <=>  alpha >= 2**(1-n); ldexp is exact
    return alpha >= math.ldexp(1.0, 1 - n)


# --------------------------------------------------------------------------
# normal special functions
# --------------------------------------------------------------------------


def normal_cdf(x):
    """Standard normal distribution function."""
    return special.ndtr(x)


def normal_quantile(p):
    """Standard normal quantile function; ``p`` must lie strictly in (0, 1)."""
    arr = np.asarray(p, dtype=float)
    if np.any(~((arr > 0.0) & (arr < 1.0))):
        raise ValueError("normal_quantile requires 0 < p < 1")
    out = special.ndtri(arr)
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=256)
def z_half(alpha: float) -> float:
    """Upper ``alpha/2`` normal quantile ``z_{alpha/2}``."""
    check_alpha(alpha)
    # -ndtri(alpha/2) avoids the rounding of 1 - alpha/2
    return float(-special.ndtri(alpha / 2.0))


# --------------------------------------------------------------------------
# Bin(n, 1/2)
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BinomialHalfDist:
    """Exact evaluator for ``Y ~ Bin(n, 1/2)``.

    The log-mass table is built once at construction.  ``cdf``/``sf`` are
    accumulated in log space from the nearer tail, so ``sf(k)`` for large
    ``k`` keeps full relative precision instead of being ``1 - cdf(k)``.

    Examples
    --------
    >>> BinomialHalfDist(5).cdf(4)
    0.96875
    """

    n: int
    log_pmf_cache: np.ndarray = field(init=False, repr=False, compare=False)
    _log_cdf: np.ndarray = field(init=False, repr=False, compare=False)
    _log_sf: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = _check_n(self.n)
        object.__setattr__(self, "n", n)
        lp = _log_pmf_table(n)
        lp.setflags(write=False)
        log_cdf = np.logaddexp.accumulate(lp)
        # P(Y > k) = P(Y < n - k) = cdf(n - k - 1) by symmetry
        log_sf = np.full(n + 1, -np.inf)
        log_sf[:-1] = log_cdf[::-1][1:]
        if n % 2:
            # P(Y <= (n-1)/2) = 1/2 exactly for odd n
            log_cdf[n // 2] = log_sf[n // 2] = -LN2
        for arr in (log_cdf, log_sf):
            arr.setflags(write=False)
        object.__setattr__(self, "log_pmf_cache", lp)
        object.__setattr__(self, "_log_cdf", log_cdf)
        object.__setattr__(self, "_log_sf", log_sf)

    def log_pmf(self, k: int) -> float:
        if k < 0 or k > self.n:
            return -math.inf
        return float(self.log_pmf_cache[k])

    def pmf(self, k: int) -> float:
        return math.exp(self.log_pmf(k))

    def log_cdf(self, k: int) -> float:
        """``log P(Y <= k)``."""
        if k < 0:
            return -math.inf
        if k >= self.n:
            return 0.0
        if 2 * k < self.n:
            return float(self._log_cdf[k])
        return float(np.log1p(-math.exp(self._log_sf[k])))

    def log_sf(self, k: int) -> float:
        """``log P(Y > k)``."""
        if k < 0:
            return 0.0
        if k >= self.n:
            return -math.inf
        if 2 * k >= self.n - 1:
            return float(self._log_sf[k])
        return float(np.log1p(-math.exp(self._log_cdf[k])))

    def cdf(self, k: int) -> float:
        """``P(Y <= k)``; 0 for ``k < 0`` and exactly 1 for ``k >= n``."""
        k = math.floor(k)
        if k < 0:
            return 0.0
        if k >= self.n:
            return 1.0
        if 2 * k < self.n:
            return math.exp(self._log_cdf[k])
        return -math.expm1(self._log_sf[k])

    def sf(self, k: int) -> float:
        """``P(Y > k)``."""
        k = math.floor(k)
        if k < 0:
            return 1.0
        if k >= self.n:
            return 0.0
        if 2 * k >= self.n - 1:
            return math.exp(self._log_sf[k])
        return -math.expm1(self._log_cdf[k])

    def log_cdf_array(self) -> np.ndarray:
        """``log P(Y <= k)`` for ``k = 0..n``, accurate in the lower half."""
        return self._log_cdf

    def log_sf_array(self) -> np.ndarray:
        """``log P(Y > k)`` for ``k = 0..n``, accurate in the upper half."""
        return self._log_sf

    def cdf_array(self) -> np.ndarray:
        """``P(Y <= k)`` for ``k = 0..n``."""
        out = np.exp(self._log_cdf)
        upper = np.arange(self.n + 1) * 2 >= self.n
        out[upper] = -np.expm1(self._log_sf[upper])
        out[-1] = 1.0
        return out

    def quantile(self, p: float) -> int:
        """Smallest integer ``k`` with ``P(Y <= k) >= p``."""
        if not 0.0 < p <= 1.0:
            raise ValueError(f"p must lie in (0, 1], got {p!r}")
        if p == 1.0:
            return self.n
        # work with the smaller of the two tails
        if p > 0.5:
            # cdf(k) >= p  <=>  sf(k) <= 1 - p
            target = math.log1p(-p)
            ok = np.flatnonzero(self._log_sf <= target)
            return int(ok[0])
        target = math.log(p)
        ok = np.flatnonzero(self._log_cdf >= target)
        return int(ok[0])

    def central_mass(self, k: int) -> float:
        """``P(floor(n/2) - k <= Y <= ceil(n/2) + k)``; 0 when the band is empty."""
        lo = self.n // 2 - k
        hi = -(-self.n // 2) + k
        if hi < lo:
            return 0.0
        # both tails are accurate in relative terms, so subtract them from 1
        return max(1.0 - (self.cdf(lo - 1) + self.sf(hi)), 0.0)


_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _stirling_error(m: np.ndarray) -> np.ndarray:
    """``log(m!) - (m + 1/2) log m + m - log(2 pi)/2`` for ``m >= 1``."""
    m = np.asarray(m, dtype=float)
    out = np.empty_like(m)
    small = m <= 15
    ms = m[small]
    out[small] = special.gammaln(ms + 1.0) - (ms + 0.5) * np.log(ms) + ms - _HALF_LOG_2PI
    mb = m[~small]
    inv2 = 1.0 / (mb * mb)
    out[~small] = (1.0 / 12 - inv2 * (1.0 / 360 - inv2 * (1.0 / 1260 - inv2 * (1.0 / 1680 - inv2 / 1188)))) / mb
    return out


def _log_pmf_table(n: int) -> np.ndarray:
    """Saddle-point form of the Bin(n, 1/2) log mass.

    Writing the mass through the divergence ``n H(k/n, 1/2)`` and Stirling
    remainders avoids the cancellation between large log-gamma values, so
    every entry is accurate to a few ulps even for ``n`` in the millions.
    """
    lp = np.full(n + 1, -n * LN2)
    if n == 1:
        return lp
    k = np.arange(1, n, dtype=float)
    rest = n - k
    lp[1:-1] = (
        _stirling_error(np.array([float(n)]))[0]
        - _stirling_error(k)
        - _stirling_error(rest)
        - n * kl_bernoulli_half(k / n)
        + 0.5 * np.log(n / (k * rest))
        - _HALF_LOG_2PI
    )
    return 0.5 * (lp + lp[::-1])


@lru_cache(maxsize=4096)
def cached_dist(n: int) -> BinomialHalfDist:
    return BinomialHalfDist(n)


def binom_half_cdf(n: int, k: int) -> float:
    """``P(Y <= k)`` for ``Y ~ Bin(n, 1/2)``.

    >>> binom_half_cdf(6, 3)
    0.65625
    """
    return cached_dist(_check_n(n)).cdf(k)


def binom_half_quantile(n: int, p: float) -> int:
    """Smallest integer ``k`` with ``P(Y <= k) >= p``."""
    return cached_dist(_check_n(n)).quantile(p)


def c_n_alpha(n: int, alpha: float) -> int:
    """Half-width, in ranks, of the distribution-free median interval.

    Smallest integer ``x`` with ``P(Y >= floor(n/2) - x) >= 1 - alpha/2``,
    computed as ``G_n^{-1}(1 - alpha/2) - ceil(n/2)``.
    """
    n = _check_n(n)
    alpha = check_alpha(alpha)
    dist = cached_dist(n)
    # G^{-1}(1 - a/2): smallest k with P(Y > k) <= a/2, no rounding of 1 - a/2
    target = math.log(alpha / 2.0)
    k = int(np.flatnonzero(dist._log_sf <= target)[0])
    return k - (n + 1) // 2


@dataclass(frozen=True)
class QuantileSandwich:
    """Analytic corridor around ``c_{n,alpha}``.

    ``lower_bound``/``upper_bound`` bound the centred quantity
    ``c_exact - sqrt(n) z/2``; ``c_lower``/``c_upper`` are the same corridor
    expressed on the scale of ``c`` itself.  Below the nontrivial sample size
    the corridor collapses to the singleton ``floor(n/2) - sqrt(n) z/2``.
    """

    n: int
    alpha: float
    c_exact: int
    lower_bound: float
    upper_bound: float
    degenerate: bool = False

    @property
    def center(self) -> float:
        return math.sqrt(self.n) * z_half(self.alpha) / 2.0

    @property
    def c_lower(self) -> float:
        return self.center + self.lower_bound

    @property
    def c_upper(self) -> float:
        return self.center + self.upper_bound

    @property
    def width(self) -> float:
        return self.upper_bound - self.lower_bound

    def contains_exact(self) -> bool:
        offset = self.c_exact - self.center
        return self.lower_bound <= offset <= self.upper_bound


def c_n_alpha_sandwich(n: int, alpha: float) -> QuantileSandwich:
    n = _check_n(n)
    alpha = check_alpha(alpha)
    z = z_half(alpha)
    c = c_n_alpha(n, alpha)
    if not nontrivial_sample_size(n, alpha):
        offset = n // 2 - math.sqrt(n) * z / 2.0
        return QuantileSandwich(n, alpha, n // 2, offset, offset, degenerate=True)
    slack = max(z**3 / 5.0, math.sqrt(1.0 + (2.0 * LN2 - 1.0) / n**2)) / (2.0 * math.sqrt(n))
    return QuantileSandwich(n, alpha, c, -slack - 1.5, 1.0)


# --------------------------------------------------------------------------
# KL divergence to Bernoulli(1/2) and the normal-KL binomial bounds
# --------------------------------------------------------------------------

# H(1/2 + t/2, 1/2) = sum_k t^{2k} / (2k (2k-1)); used where the closed
# form cancels catastrophically.
_SERIES_COEF = [1.0 / (2.0 * k * (2.0 * k - 1.0)) for k in range(1, 27)]


def _kl_half_series(t: np.ndarray) -> np.ndarray:
    # Horner in t^2; 26 terms reach double precision for |t| < 1/2
    t2 = t * t
    acc = np.zeros_like(t2)
    for coef in reversed(_SERIES_COEF):
        acc = acc * t2 + coef
    return acc * t2


def kl_bernoulli_half(x):
    """``H(x, 1/2) = x ln(2x) + (1-x) ln(2-2x)`` with ``0 ln 0 = 0``.

    Accurate to full relative precision near ``x = 1/2``.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(~((arr >= 0.0) & (arr <= 1.0))):
        raise ValueError("kl_bernoulli_half requires 0 <= x <= 1")
    t = 2.0 * arr - 1.0
    small = np.abs(t) < 0.5
    out = np.empty_like(arr)
    out[small] = _kl_half_series(t[small])
    big = ~small
    xb = arr[big]
    out[big] = special.xlogy(xb, 2.0 * xb) + special.xlogy(1.0 - xb, 2.0 - 2.0 * xb)
    return float(out) if out.ndim == 0 else out


def zubkov_bound(n: int, k: int) -> float:
    """``Phi(sgn(k/n - 1/2) sqrt(2 n H(k/n, 1/2)))`` for ``1 <= k <= n-1``.

    Sandwiches the binomial distribution function:
    ``C(k-1) <= G(k-1) <= C(k) <= G(k) <= C(k+1)``.
    """
    n = _check_n(n)
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must lie in [1, n-1], got k={k}, n={n}")
    return float(normal_cdf(zubkov_argument(n, k)))


def zubkov_argument(n: int, k):
    """The normal argument ``sgn(k/n - 1/2) sqrt(2 n H(k/n, 1/2))``, vectorised over ``k``."""
    k = np.asarray(k)
    x = k / n
    return np.sign(2 * k - n) * np.sqrt(2.0 * n * kl_bernoulli_half(x))
