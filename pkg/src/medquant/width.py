"""Width behaviour of the exact median interval.

Covers the leading-order width predictions, the transform whose image of a
shifted Gaussian is the limiting law of the scaled width, a Monte Carlo
sampler and kernel density for that law, the explicit finite-sample error
bounds, and the empirical-count statistic ``Q`` that drives them.

Local behaviour at the median is described by :class:`NonStdParams`:
``F(t0 + h) - F(t0) ~ M |h|^rho sgn(h)``, possibly with different constants
on each side, up to an error ``C |h|^(rho + Delta)`` for ``|h| < eta``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from ._rng import make_rng
from .baselines import bw_nrd0, kde_at
from .binom import c_n_alpha, check_alpha, z_half
from .errors import PreconditionError

__all__ = [
    "NonStdParams",
    "LimitLawSample",
    "signed_power",
    "g_transform",
    "g_transform_symmetric",
    "g_transform_asymmetric",
    "sample_limit_law",
    "limit_law_density",
    "write_density_csv",
    "wald_width_prediction",
    "nonstandard_width_bound",
    "finite_sample_width_rhs_standard",
    "finite_sample_width_rhs_nonstandard",
    "c_rho_alpha",
    "q_statistic",
]


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not (value > 0.0 and math.isfinite(value)):
        raise ValueError(f"{name} must be positive and finite, got {value!r}")
    return value


@dataclass(frozen=True)
class NonStdParams:
    rho: float
    m_minus: float = 0.5
    m_plus: float = 0.5
    c_const: float = 1.0
    delta_cap: float = 1.0
    eta: float = 1.0

    def __post_init__(self):
        for name in ("rho", "m_minus", "m_plus", "c_const", "delta_cap", "eta"):
            object.__setattr__(self, name, _positive(name, getattr(self, name)))

    @classmethod
    def symmetric(cls, rho: float, m: float = 0.5, **kw) -> "NonStdParams":
        return cls(rho, m, m, **kw)

    @property
    def is_symmetric(self) -> bool:
        return self.m_minus == self.m_plus

    @property
    def delta(self) -> float:
        return self.delta_cap / self.rho

    @property
    def m(self) -> float:
        return min(self.m_minus, self.m_plus)

    @property
    def zeta(self) -> float:
        return (self.m / 2.0) * min(self.eta**self.rho, (self.m / (2.0 * self.c_const)) ** (1.0 / self.delta))


def signed_power(x, p: float):
    """``|x|^p sgn(x)``, elementwise."""
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.abs(x) ** p


def g_transform_symmetric(a, b, rho: float):
    a = np.asarray(a, dtype=float)
    if rho == 1.0:
        # a - (a - b) is b algebraically but not always in floating point
        return np.broadcast_to(np.asarray(b, dtype=float), np.broadcast_shapes(a.shape, np.shape(b))).copy()
    inv = 1.0 / rho
    return signed_power(a, inv) - signed_power(a - b, inv)


def g_transform_asymmetric(a, b, rho: float, m_minus: float, m_plus: float):
    """Side-weighted transform; reduces to the symmetric one when ``m_minus == m_plus``."""
    inv = 1.0 / rho
    a = np.asarray(a, dtype=float)
    d = a - b
    w_minus, w_plus = m_minus ** (-inv), m_plus ** (-inv)
    first = signed_power(a, inv) * np.where(a < 0, w_minus, 0.0) + signed_power(a, inv) * np.where(a > 0, w_plus, 0.0)
    second = signed_power(d, inv) * np.where(a < b, w_minus, 0.0) + signed_power(d, inv) * np.where(a > b, w_plus, 0.0)
    return min(m_minus, m_plus) ** inv * (first - second)


def g_transform(a, b, params: NonStdParams):
    if params.is_symmetric:
        out = g_transform_symmetric(a, b, params.rho)
    else:
        out = g_transform_asymmetric(a, b, params.rho, params.m_minus, params.m_plus)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class LimitLawSample:
    alpha: float
    rho: float
    m_minus: float
    m_plus: float
    draws: np.ndarray

    def __len__(self) -> int:
        return self.draws.size


def sample_limit_law(alpha: float, params: NonStdParams, n_draws: int = 100_000, seed=0) -> LimitLawSample:
    """Draws of ``G(W, z)`` with ``W ~ N(z/2, 1/4)``, the limit of the scaled width."""
    alpha = check_alpha(alpha)
    if n_draws < 1:
        raise ValueError("n_draws must be positive")
    z = z_half(alpha)
    rng = make_rng(seed, "limit-law")
    w = rng.normal(z / 2.0, 0.5, size=n_draws)
    draws = np.asarray(g_transform(w, z, params), dtype=float).reshape(n_draws)
    draws.setflags(write=False)
    return LimitLawSample(alpha, params.rho, params.m_minus, params.m_plus, draws)


def limit_law_density(
    alpha: float,
    params: NonStdParams,
    grid,
    n_draws: int = 100_000,
    seed=0,
) -> np.ndarray:
    """Gaussian kernel density of ``sample_limit_law`` draws on ``grid``.

    Uses the ``bw.nrd0`` bandwidth; for the point mass at ``rho = 1`` the
    bandwidth falls back to ``|mean| * 1e-3`` so the result is a narrow spike.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("grid must be a nonempty 1-d array")
    if grid.size > 1 and not np.all(np.diff(grid) > 0):
        raise ValueError("grid must be strictly increasing")
    sample = sample_limit_law(alpha, params, n_draws, seed)
    bw = bw_nrd0(sample.draws, allow_fallback=True)
    return kde_at(sample.draws, grid, bw)


def write_density_csv(path, grid, density) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "density"])
        for x, d in zip(grid, density):
            w.writerow([repr(float(x)), repr(float(d))])


def wald_width_prediction(n: int, alpha: float, f_prime: float) -> float:
    """Leading-order width ``z / (sqrt(n) f'(theta0))`` under a positive density."""
    f_prime = float(f_prime)
    if not f_prime > 0.0:
        raise ValueError("f_prime must be positive")
    return z_half(alpha) / (math.sqrt(n) * f_prime)


def nonstandard_width_bound(n: int, alpha: float, rho: float, m: float) -> float:
    """Leading-order width bound ``2^(1 - 1/rho) (z / (sqrt(n) m))^(1/rho)`` for ``rho >= 1``."""
    if not rho >= 1.0:
        raise ValueError("the bound applies only for rho >= 1")
    m = _positive("m", m)
    return 2.0 ** (1.0 - 1.0 / rho) * (z_half(alpha) / (math.sqrt(n) * m)) ** (1.0 / rho)


def _min_n_standard(n: int, alpha: float, zeta: float) -> float:
    return max(math.log2(2.0 / alpha), 49.0 * math.log(2.0 * n / alpha) / zeta**2)


def finite_sample_width_rhs_standard(
    n: int,
    alpha: float,
    m: float,
    c_const: float,
    delta: float,
    eta: float = 1.0,
    *,
    check: bool = True,
) -> float:
    """High-probability bound on ``|sqrt(n) m Width / z - 1|`` when ``F'(theta0) = m``.

    The precondition on ``n`` is enforced unless ``check=False``.
    """
    alpha = check_alpha(alpha)
    m, c_const, delta, eta = (_positive(k, v) for k, v in (("m", m), ("c_const", c_const), ("delta", delta), ("eta", eta)))
    zeta = (m / 2.0) * min(eta, (m / (2.0 * c_const)) ** (1.0 / delta))
    need = _min_n_standard(n, alpha, zeta)
    if check and n < need:
        raise PreconditionError(f"n={n} is below the required {need:.6g}")
    z = z_half(alpha)
    lg = math.log(2.0 * n / alpha)
    return (
        (1.0 + 14.0 * math.log(n) / z) / n**0.25
        + math.sqrt(math.log(2.0 / alpha) / (8.0 * n))
        + 2.0 * c_const * 14.0 ** (1.0 + delta) * lg ** ((1.0 + delta) / 2.0) / (z * m ** (1.0 + delta) * n ** (delta / 2.0))
    )


@dataclass(frozen=True)
class CRhoAlpha:
    """The Lipschitz constant and the pieces it is assembled from, all at one ``n``."""

    value: float
    e0: float
    e1: float
    e2: float
    e3: float


def c_rho_alpha(n: int, alpha: float, params: NonStdParams) -> CRhoAlpha:
    """``(2/rho) E0^(1/rho - 1)`` with the concentration radii evaluated at this ``n``.

    The radii are defined as suprema over all sample sizes, which diverge
    like ``sqrt(log n)``; the value at the given ``n`` is used instead.
    """
    alpha = check_alpha(alpha)
    if n < 2:
        raise ValueError("n must be at least 2")
    z = z_half(alpha)
    rn = math.sqrt(n)
    logn = math.log(n)
    head = z**3 / (10.0 * n) + 2.0 / rn
    e1 = head + math.sqrt(3.0 * (n + rn * z + 4.0) * logn / n)
    e2 = head + math.sqrt(max(3.0 * (n - rn * z + z**3 / (5.0 * rn) + 3.2) * logn / n, 0.0))
    delta = params.delta
    gamma = 208.0 * (logn / n) ** 0.75 + params.c_const * (14.0 / params.m) ** (1.0 + delta) * (
        math.log(2.0 * n / alpha) / n
    ) ** ((1.0 + delta) / 2.0)
    e3 = rn * gamma
    e0 = z / 2.0 + max(e1, e2) + e3
    rho = params.rho
    return CRhoAlpha((2.0 / rho) * e0 ** (1.0 / rho - 1.0), e0, e1, e2, e3)


def finite_sample_width_rhs_nonstandard(n: int, alpha: float, params: NonStdParams, *, check: bool = True) -> float:
    """High-probability bound on ``n^(1/(2 rho)) |M^(1/rho) Width - G(Q, z/sqrt(n))|``."""
    alpha = check_alpha(alpha)
    z = z_half(alpha)
    need = max(_min_n_standard(n, alpha, params.zeta), 4.0 * z * z)
    if check and n < need:
        raise PreconditionError(f"n={n} is below the required {need:.6g}")
    crho = c_rho_alpha(n, alpha, params).value
    power = min(1.0, 1.0 / params.rho)
    delta = params.delta
    lg2n = math.log(2.0 * n / alpha)
    first = 208.0 * math.log(n) ** 0.75 / n**0.25 + params.c_const / n ** (delta / 2.0) * (
        14.0 * math.sqrt(lg2n) / params.m
    ) ** (1.0 + delta)
    second = 4.2 * math.log(2.0 / alpha) ** 0.25 * math.sqrt(lg2n) / n**0.25 + 9.5 * math.sqrt(math.log(n)) / math.sqrt(n)
    return max(4.0, 2.0 * crho) * first**power + max(2.0, crho) * second**power


def q_statistic(f_values, n: int, alpha: float) -> float:
    """``(t - 1/2) - (mean(1{F(X_i) <= t}) - t)`` at ``t = (c + ceil(n/2) + 1) / n``.

    ``f_values`` are the probability integral transforms ``F(X_i)``.
    """
    u = np.asarray(f_values, dtype=float).ravel()
    if u.size != n:
        raise ValueError(f"expected {n} values, got {u.size}")
    if np.any(~((u >= 0.0) & (u <= 1.0))):
        raise ValueError("f_values must lie in [0, 1]")
    t = (c_n_alpha(n, alpha) + (n + 1) // 2 + 1) / n
    frac = np.count_nonzero(u <= t) / n
    return (t - 0.5) - (frac - t)
