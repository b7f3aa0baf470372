"""Seeded Monte Carlo harness for coverage, width and split-and-rank experiments.

Every replication draws from its own stream keyed by the cell and the
replication index, so results do not depend on execution order or on the
number of worker threads.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from ._rng import make_rng
from .baselines import bootstrap_ci, subsample_ci, wald_ci
from .binom import check_alpha, nontrivial_sample_size, z_half
from .errors import PreconditionError
from .ghulc import GhulcConfig, ghulc_ci, hulc_ci
from .medci import Method, Sample, median_ci_exact, median_ci_hoeffding
from .width import NonStdParams, sample_limit_law

__all__ = [
    "FrhoDist",
    "SimulationReport",
    "sample_frho",
    "run_coverage_experiment",
    "run_width_limit_experiment",
    "ks_distance",
    "qr_estimator",
    "sample_qr_data",
    "run_ghulc_experiment",
    "run_mean_ratio_experiment",
    "width_summary",
    "write_summary_csv",
    "write_widths_csv",
    "write_reports_json",
    "default_workers",
    "DEFAULT_RHO_GRID",
    "DEFAULT_N_GRID",
    "WIDTH_DISPLAY_CAP",
]

DEFAULT_RHO_GRID = (0.2, 0.5, 0.75, 1.0, 2.0, 5.0, 10.0)
DEFAULT_N_GRID = (50, 200, 500, 1000)
# box plots of scaled widths are clipped here for display only
WIDTH_DISPLAY_CAP = 40.0


def default_workers() -> int:
    """CPU count, capped by ``MEDQUANT_THREADS`` when set."""
    n = os.cpu_count() or 1
    env = os.environ.get("MEDQUANT_THREADS")
    if env:
        try:
            cap = int(env)
        except ValueError:
            raise ValueError(f"MEDQUANT_THREADS must be an integer, got {env!r}") from None
        if cap < 1:
            raise ValueError("MEDQUANT_THREADS must be positive")
        n = min(n, cap)
    return n


def _map(fn: Callable, items: Sequence, workers: int | None) -> list:
    workers = default_workers() if workers is None else workers
    if workers <= 1 or len(items) < 2:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _derive_seed(seed, *keys) -> int:
    return int(make_rng(seed, *keys).integers(2**63))


@dataclass(frozen=True)
class FrhoDist:
    """``F(x) = (1 + |x|^rho sgn(x)) / 2`` on ``[-1, 1]``; median 0, local scale 1/2."""

    rho: float
    median: float = field(default=0.0, init=False)
    local_scale: float = field(default=0.5, init=False)

    def __post_init__(self):
        if not (self.rho > 0 and math.isfinite(self.rho)):
            raise ValueError(f"rho must be positive, got {self.rho!r}")

    def cdf(self, x):
        x = np.clip(np.asarray(x, dtype=float), -1.0, 1.0)
        out = 0.5 + 0.5 * np.sign(x) * np.abs(x) ** self.rho
        return float(out) if out.ndim == 0 else out

    def ppf(self, u):
        v = 2.0 * np.asarray(u, dtype=float) - 1.0
        out = np.sign(v) * np.abs(v) ** (1.0 / self.rho)
        return float(out) if out.ndim == 0 else out


def sample_frho(rho: float, n: int, seed, *keys) -> Sample:
    """``n`` inverse-CDF draws from ``F_rho``."""
    dist = FrhoDist(rho)
    if n < 1:
        raise ValueError("n must be positive")
    return Sample(dist.ppf(make_rng(seed, "frho", *keys).random(n)))


@dataclass(frozen=True)
class SimulationReport:
    """Outcome of one experiment cell.

    ``replications`` counts the recorded outcomes; replications whose method
    raised are tallied in ``failures`` and left out of ``coverage``.
    """

    method: str
    n: int
    shape_param: float
    replications: int
    coverage: float
    widths: np.ndarray
    seed: int
    failures: int = 0
    n_blocks: int | None = None
    alpha: float = 0.05

    def __post_init__(self):
        if not 0.0 <= self.coverage <= 1.0 and self.replications > 0:
            raise ValueError("coverage must lie in [0, 1]")
        if self.widths.size != self.replications:
            raise ValueError("one width per recorded replication")
        if np.any(self.widths < 0):
            raise ValueError("widths must be nonnegative")

    @property
    def standard_error(self) -> float:
        if self.replications == 0:
            return math.nan
        p = self.coverage
        return math.sqrt(p * (1.0 - p) / self.replications)

    def summary(self) -> dict:
        row = {
            "method": self.method,
            "n": self.n,
            "shape_param": self.shape_param,
            "n_blocks": self.n_blocks if self.n_blocks is not None else "",
            "alpha": self.alpha,
            "replications": self.replications,
            "failures": self.failures,
            "coverage": self.coverage,
            "seed": self.seed,
        }
        row.update({f"width_{k}": v for k, v in width_summary(self.widths).items()})
        return row


def width_summary(widths) -> dict:
    """Box-plot quantiles ``min, q25, q50, q75, max`` taken as observed values (NaN when empty)."""
    w = np.asarray(widths, dtype=float)
    keys = ("min", "q25", "q50", "q75", "max")
    if w.size == 0:
        return dict.fromkeys(keys, math.nan)
    return dict(zip(keys, (float(v) for v in np.quantile(w, [0.0, 0.25, 0.5, 0.75, 1.0], method="inverted_cdf"))))


def _make_report(method, n, shape, outcomes, seed, alpha, n_blocks=None) -> SimulationReport:
    ok = [o for o in outcomes if o is not None]
    hits = sum(c for c, _ in ok)
    widths = np.array([w for _, w in ok], dtype=float)
    cov = hits / len(ok) if ok else math.nan
    return SimulationReport(
        str(method), int(n), float(shape), len(ok), cov, widths, int(seed),
        len(outcomes) - len(ok), n_blocks, alpha,
    )


_COVERAGE_METHODS = {
    Method.EXACT: lambda s, a, sd, kw: median_ci_exact(s, a),
    Method.HOEFFDING: lambda s, a, sd, kw: median_ci_hoeffding(s, a),
    Method.WALD: lambda s, a, sd, kw: wald_ci(s, a),
    Method.BOOTSTRAP: lambda s, a, sd, kw: bootstrap_ci(s, a, kw["n_boot"], seed=sd),
    Method.SUBSAMPLE: lambda s, a, sd, kw: subsample_ci(s, a, seed=sd, n_sub=kw["n_sub"]),
}

_METHOD_ALIASES = {
    "exact": Method.EXACT,
    "hoeffding": Method.HOEFFDING,
    "wald": Method.WALD,
    "bootstrap": Method.BOOTSTRAP,
    "subsample": Method.SUBSAMPLE,
}


def _coverage_method(name) -> Method:
    if isinstance(name, Method):
        m = name
    else:
        m = _METHOD_ALIASES.get(str(name).lower())
        if m is None:
            try:
                m = Method(name)
            except ValueError:
                raise ValueError(f"unknown method {name!r}") from None
    if m not in _COVERAGE_METHODS:
        raise ValueError(f"method {m.value} is not a median-interval method")
    return m


def run_coverage_experiment(
    methods: Iterable,
    n_list: Iterable[int],
    rho_list: Iterable[float],
    alpha: float,
    replications: int,
    seed: int,
    *,
    workers: int | None = None,
    n_boot: int = 1000,
    n_sub: int = 1000,
) -> list[SimulationReport]:
    """Coverage of 0 and scaled widths ``n^(1/(2 rho)) Width`` under ``F_rho``.

    All methods see the same data in a given replication.  Reports are
    ordered by ``(n, rho, method)`` in the order the grids were given.
    """
    alpha = check_alpha(alpha)
    ms = [_coverage_method(m) for m in methods]
    if replications < 100:
        raise ValueError("replications must be at least 100")
    kw = {"n_boot": n_boot, "n_sub": n_sub}
    reports = []
    for n in n_list:
        for rho in rho_list:
            FrhoDist(rho)
            scale = n ** (1.0 / (2.0 * rho))

            def one(r, n=n, rho=rho, scale=scale):
                sample = sample_frho(rho, n, seed, n, rho, r)
                out = {}
                for m in ms:
                    try:
                        ci = _COVERAGE_METHODS[m](sample, alpha, _derive_seed(seed, m.value, n, rho, r), kw)
                    except (PreconditionError, ValueError):
                        out[m] = None
                        continue
                    out[m] = (ci.contains(0.0), scale * ci.width)
                return out

            rows = _map(one, range(replications), workers)
            for m in ms:
                reports.append(_make_report(m.value, n, rho, [row[m] for row in rows], seed, alpha))
    return reports


def run_width_limit_experiment(
    rho: float,
    alpha: float,
    n: int,
    replications: int,
    seed: int,
    *,
    workers: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Scaled exact-interval widths under ``F_rho`` and as many limit-law draws.

    The scaled width is ``n^(1/(2 rho)) M^(1/rho) Width`` with ``M = 1/2``.
    """
    alpha = check_alpha(alpha)
    if not nontrivial_sample_size(n, alpha):
        raise PreconditionError(f"n={n} is below log2(2/alpha)")
    if replications < 1:
        raise ValueError("replications must be positive")
    dist = FrhoDist(rho)
    scale = n ** (1.0 / (2.0 * rho)) * dist.local_scale ** (1.0 / rho)

    def one(r):
        return scale * median_ci_exact(sample_frho(rho, n, seed, "width", n, rho, r), alpha).width

    widths = np.array(_map(one, range(replications), workers))
    limit = sample_limit_law(alpha, NonStdParams.symmetric(rho, dist.local_scale), replications, seed).draws
    return widths, np.array(limit)


def ks_distance(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov statistic ``sup |F_a - F_b|``."""
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be nonempty")
    pooled = np.concatenate([a, b])
    fa = np.searchsorted(a, pooled, side="right") / a.size
    fb = np.searchsorted(b, pooled, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def qr_estimator(data) -> float:
    """Least-absolute-deviation slope through the origin.

    The minimizer of ``sum |y - theta x|`` is the ``|x|``-weighted median of
    ``y / x``; the smallest minimizer is returned when there is a flat stretch.
    """
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("data must be an (n, 2) array of (x, y) pairs")
    x, y = arr[:, 0], arr[:, 1]
    keep = x != 0.0
    if not keep.any():
        raise ValueError("at least one x must be nonzero")
    ratios = y[keep] / x[keep]
    weights = np.abs(x[keep])
    order = np.argsort(ratios, kind="stable")
    cum = np.cumsum(weights[order])
    k = int(np.searchsorted(2.0 * cum, cum[-1], side="left"))
    return float(ratios[order[min(k, cum.size - 1)]])


def sample_qr_data(n: int, beta: float, seed, *keys) -> np.ndarray:
    """``(x, y)`` rows with ``x ~ U[-1, 1]``, ``y = x + eps`` and ``eps ~ F_beta``."""
    noise = FrhoDist(beta)
    if n < 1:
        raise ValueError("n must be positive")
    rng = make_rng(seed, "qr", *keys)
    x = rng.uniform(-1.0, 1.0, n)
    eps = noise.ppf(rng.random(n))
    return np.column_stack([x, x + eps])


def run_ghulc_experiment(
    n_list: Iterable[int],
    beta_list: Iterable[float],
    B_list: Iterable[int],
    alpha: float,
    replications: int,
    seed: int,
    *,
    include_hulc: bool = True,
    workers: int | None = None,
) -> list[SimulationReport]:
    """Coverage of the slope 1 and scaled widths ``n^(1/(2 beta)) Width`` for HulC and G-HulC.

    The block estimates run sequentially inside each replication; parallelism
    is across replications.
    """
    alpha = check_alpha(alpha)
    B_list = list(B_list)
    for B in B_list:
        GhulcConfig(alpha, B)
    reports = []
    for n in n_list:
        for beta in beta_list:
            FrhoDist(beta)
            scale = n ** (1.0 / (2.0 * beta))

            def one(r, n=n, beta=beta, scale=scale):
                data = sample_qr_data(n, beta, seed, n, beta, r)
                out = {}
                if include_hulc:
                    ci = hulc_ci(data, alpha, qr_estimator, seed=_derive_seed(seed, "hulc", n, beta, r), workers=1)
                    out["hulc"] = (ci.contains(1.0), scale * ci.width)
                for B in B_list:
                    try:
                        cfg = GhulcConfig(alpha, B, seed=_derive_seed(seed, "ghulc", n, beta, B, r))
                        ci = ghulc_ci(data, cfg, qr_estimator, workers=1)
                    except (PreconditionError, ValueError):
                        out[B] = None
                        continue
                    out[B] = (ci.contains(1.0), scale * ci.width)
                return out

            rows = _map(one, range(replications), workers)
            if include_hulc:
                reports.append(_make_report(Method.HULC.value, n, beta, [row["hulc"] for row in rows], seed, alpha))
            for B in B_list:
                reports.append(
                    _make_report(Method.GHULC.value, n, beta, [row[B] for row in rows], seed, alpha, n_blocks=B)
                )
    return reports


def _block_mean(block: np.ndarray) -> float:
    return float(block.mean())


def run_mean_ratio_experiment(
    n: int,
    n_blocks: int,
    alpha: float,
    replications: int,
    seed: int,
    *,
    workers: int | None = None,
) -> np.ndarray:
    """Per-replication ratio of the G-HulC width over block means to the Wald mean-interval width.

    Data are standard normal; the Wald interval is ``mean -/+ z s / sqrt(n)``.
    """
    alpha = check_alpha(alpha)
    z = z_half(alpha)

    def one(r):
        x = make_rng(seed, "gauss", n, r).standard_normal(n)
        cfg = GhulcConfig(alpha, n_blocks, seed=_derive_seed(seed, "ratio", n, n_blocks, r))
        g = ghulc_ci(x, cfg, _block_mean, workers=1).width
        return g / (2.0 * z * float(np.std(x, ddof=1)) / math.sqrt(n))

    return np.array(_map(one, range(replications), workers))


_SUMMARY_FIELDS = (
    "method", "n", "shape_param", "n_blocks", "alpha", "replications", "failures", "coverage", "seed",
    "width_min", "width_q25", "width_q50", "width_q75", "width_max",
)


def write_summary_csv(reports: Sequence[SimulationReport], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=_SUMMARY_FIELDS, lineterminator="\n")
        w.writeheader()
        for rep in reports:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in rep.summary().items()})


def write_widths_csv(reports: Sequence[SimulationReport], path) -> None:
    """One row per recorded replication."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["method", "n", "shape_param", "n_blocks", "index", "scaled_width"])
        for rep in reports:
            nb = rep.n_blocks if rep.n_blocks is not None else ""
            for i, width in enumerate(rep.widths):
                w.writerow([rep.method, rep.n, repr(rep.shape_param), nb, i, repr(float(width))])


def _json_safe(v):
    if isinstance(v, float) and not math.isfinite(v):
        return "nan" if math.isnan(v) else ("+inf" if v > 0 else "-inf")
    return v


def write_reports_json(reports: Sequence[SimulationReport], path, meta: dict | None = None) -> None:
    doc = {
        "meta": dict(meta or {}, width_display_cap=WIDTH_DISPLAY_CAP),
        "cells": [{k: _json_safe(v) for k, v in rep.summary().items()} for rep in reports],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
