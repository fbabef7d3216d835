"""Bootstrap resampling and violation-degree reports for the two detectors."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .binning import bin_indices
from .detect import moment_matrix_from_moments, normally_ordered_moments

__all__ = [
    "BootstrapSpec",
    "BootstrapResult",
    "ViolationReport",
    "resample_indices",
    "bootstrap",
    "three_bin_statistic",
    "min_eigenvalue_statistic",
    "violation_bin",
    "violation_moment",
    "compare_methods",
]

SUBSAMPLE = "subsample-from-pool"
REPLACEMENT = "resample-with-replacement"

# A statistic maps a resampled outcome array to (value, degenerate_flag).
Statistic = Callable[[np.ndarray], tuple[float, bool]]


@dataclass(frozen=True)
class BootstrapSpec:
    """Resampling plan: size per resample, number of resamples, seeding, mode."""

    resample_size: int
    n_resamples: int
    master_seed: int
    mode: str = SUBSAMPLE

    def __post_init__(self):
        if self.resample_size < 1:
            raise ValueError("resample size must be >= 1")
        if self.n_resamples < 2:
            raise ValueError("need at least two resamples")
        if self.mode not in (SUBSAMPLE, REPLACEMENT):
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass(frozen=True)
class BootstrapResult:
    mean: float
    std: float
    samples: np.ndarray
    n_flagged: int = 0


@dataclass(frozen=True)
class ViolationReport:
    """Statistical significance of one detector's verdict.

    ``v`` is (classical limit - mean) / std with limit 1 for the bin ratio and
    0 for the minimum eigenvalue; positive means detection.
    """

    method: str
    params: dict = field(default_factory=dict)
    mean: float = 0.0
    std: float = 0.0
    v: float = 0.0
    n_flagged: int = 0

    @property
    def detected(self) -> bool:
        return self.v > 0.0

    def to_json_dict(self) -> dict:
        return {
            "method": self.method,
            "params": dict(self.params),
            "mean": self.mean,
            "std": self.std,
            "v": self.v,
            "n_flagged": self.n_flagged,
            "detected": self.detected,
        }


def resample_indices(spec: BootstrapSpec, pool_size: int, b: int, stream: int = 0) -> np.ndarray:
    """Index set of resample ``b``, a pure function of (spec, pool, b, stream).

    Independent of evaluation order, so parallel workers agree with the
    serial loop.
    """
    if spec.mode == SUBSAMPLE and pool_size < spec.resample_size:
        raise ValueError(f"pool of {pool_size} cannot supply {spec.resample_size} without replacement")
    rng = np.random.default_rng([spec.master_seed, stream, b])
    if spec.mode == SUBSAMPLE:
        return rng.choice(pool_size, size=spec.resample_size, replace=False)
    return rng.integers(0, pool_size, size=spec.resample_size)


def bootstrap(data, spec: BootstrapSpec, statistic: Statistic, stream: int = 0) -> BootstrapResult:
    """Evaluate ``statistic`` on ``n_resamples`` resamples of the dataset.

    Degenerate resamples keep the statistic's pinned value and are counted in
    ``n_flagged``. The spread is the divide-by-B standard deviation of the B
    values, which are the full empirical estimator distribution.
    """
    x = data.x
    values = np.empty(spec.n_resamples)
    flagged = 0
    for b in range(spec.n_resamples):
        value, bad = statistic(x[resample_indices(spec, x.size, b, stream)])
        values[b] = value
        flagged += bad
    return BootstrapResult(float(values.mean()), float(values.std()), values, flagged)


def _three_bin_from_outcomes(x: np.ndarray, sigma: float, d: int) -> tuple[float, bool]:
    m = bin_indices(x, sigma)
    c0 = int(np.count_nonzero(m == 0))
    cpos = int(np.count_nonzero(m == d))
    cneg = int(np.count_nonzero(m == -d))
    if c0 == 0 or cpos == 0 or cneg == 0:
        # pinned to the degenerate value; the flag keeps it out of silent use
        return 0.0, True
    return float(cpos * cneg / c0**2 * np.exp(sigma**2 * d**2)), False


def three_bin_statistic(sigma: float, d: int) -> Statistic:
    """Binned ratio statistic at fixed (sigma, d) for use under the bootstrap."""

    def stat(x: np.ndarray) -> tuple[float, bool]:
        return _three_bin_from_outcomes(x, sigma, d)

    return stat


def min_eigenvalue_statistic(n: int) -> Statistic:
    """Smallest eigenvalue of the order-n moment matrix as a bootstrap statistic."""

    def stat(x: np.ndarray) -> tuple[float, bool]:
        moms = normally_ordered_moments(x, 2 * n - 2)
        return moment_matrix_from_moments(moms, n).lambda_min, False

    return stat


def _violation(samples, limit: float, method: str, params: dict, n_flagged: int) -> ViolationReport:
    values = np.asarray(samples, dtype=float)
    mean = float(values.mean())
    std = float(values.std())
    if std == 0.0:
        raise ValueError("statistic spread is zero; violation degree is undefined")
    return ViolationReport(method, params, mean, std, (limit - mean) / std, n_flagged)


def violation_bin(samples, sigma: float | None = None, d: int | None = None, n_flagged: int = 0) -> ViolationReport:
    """Violation degree (1 - mean) / std of binned-ratio samples."""
    params = {k: v for k, v in (("sigma", sigma), ("d", d)) if v is not None}
    return _violation(samples, 1.0, "three-bin", params, n_flagged)


def violation_moment(samples, n: int | None = None, n_flagged: int = 0) -> ViolationReport:
    """Violation degree (0 - mean) / std of minimum-eigenvalue samples."""
    params = {"n": n} if n is not None else {}
    return _violation(samples, 0.0, "moment", params, n_flagged)


def compare_methods(
    data,
    sigma: float,
    d: int,
    moment_orders,
    spec: BootstrapSpec,
    stream: int = 0,
) -> list[ViolationReport]:
    """Paired comparison of the bin test and the moment method on one dataset.

    Every method is evaluated on the identical resample index sets, so the
    violation degrees are directly comparable.
    """
    orders = sorted(set(int(n) for n in moment_orders))
    x = data.x
    j_max = 2 * max(orders) - 2
    r_vals = np.empty(spec.n_resamples)
    lam_vals = {n: np.empty(spec.n_resamples) for n in orders}
    flagged = 0
    for b in range(spec.n_resamples):
        xs = x[resample_indices(spec, x.size, b, stream)]
        r, bad = _three_bin_from_outcomes(xs, sigma, d)
        r_vals[b] = r
        flagged += bad
        moms = normally_ordered_moments(xs, j_max)
        for n in orders:
            lam_vals[n][b] = moment_matrix_from_moments(moms, n).lambda_min
    reports = [violation_bin(r_vals, sigma=sigma, d=d, n_flagged=flagged)]
    reports.extend(violation_moment(lam_vals[n], n=n) for n in orders)
    return reports
