"""Confidence intervals and regressions used by the estimators"""

import logging
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from src.models.errors import InsufficientDataError
from src.models.report import EstimateReport, SlopeFit

logger = logging.getLogger(__name__)

Z95 = float(stats.norm.ppf(0.975))


def clopper_pearson(successes: int, trials: int, level: float = 0.95) -> Tuple[float, float]:
    """Exact binomial confidence interval"""
    if trials <= 0:
        return 0.0, 1.0
    alpha = 1.0 - level
    lo = 0.0 if successes == 0 else float(stats.beta.ppf(alpha / 2, successes, trials - successes + 1))
    hi = 1.0 if successes == trials else float(stats.beta.ppf(1 - alpha / 2, successes + 1, trials - successes))
    return lo, hi


def proportion_report(successes: int, trials: int, seed: int, wall_time: float = 0.0,
                      censored_fraction: float = 0.0) -> EstimateReport:
    p = successes / trials if trials > 0 else 0.0
    se = float(np.sqrt(p * (1 - p) / trials)) if trials > 0 else 0.0
    return EstimateReport(
        estimate=p,
        std_error=se,
        ci95=clopper_pearson(successes, trials),
        n_samples=trials,
        seed=seed,
        wall_time=wall_time,
        censored_fraction=censored_fraction,
    )


def mean_report(values: np.ndarray, seed: int, wall_time: float = 0.0,
                censored_fraction: float = 0.0) -> EstimateReport:
    values = np.asarray(values, dtype=float)
    n = values.size
    mean = float(values.mean()) if n else float("nan")
    se = float(values.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return EstimateReport(
        estimate=mean,
        std_error=se,
        ci95=(mean - Z95 * se, mean + Z95 * se),
        n_samples=n,
        seed=seed,
        wall_time=wall_time,
        censored_fraction=censored_fraction,
    )


def weighted_loglog_fit(x: Sequence[float], y: Sequence[float],
                        y_std_error: Optional[Sequence[float]] = None) -> SlopeFit:
    """Weighted least squares of log y against log x.

    Weights come from the delta method: Var(log y) ≈ (se/y)^2.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    mask = (x > 0) & (y > 0)
    if mask.sum() < 2:
        raise InsufficientDataError("need at least two positive points for a log-log fit", count=int(mask.sum()))
    lx, ly = np.log(x[mask]), np.log(y[mask])
    if y_std_error is None:
        w = np.ones_like(lx)
    else:
        rel = np.asarray(y_std_error, dtype=float)[mask] / y[mask]
        rel = np.where(rel > 0, rel, np.nan)
        w = 1.0 / rel ** 2
        w = np.where(np.isfinite(w), w, np.nanmax(w) if np.any(np.isfinite(w)) else 1.0)
    design = np.column_stack([np.ones_like(lx), lx])
    sw = np.sqrt(w)
    coef, *_ = np.linalg.lstsq(design * sw[:, None], ly * sw, rcond=None)
    intercept, slope = float(coef[0]), float(coef[1])
    cov = np.linalg.inv(design.T @ (design * w[:, None]))
    n = lx.size
    if y_std_error is None and n > 2:
        resid = ly - design @ coef
        cov = cov * float(resid @ resid) / (n - 2)
    se = float(np.sqrt(cov[1, 1]))
    return SlopeFit(slope=slope, intercept=intercept, std_error=se,
                    ci95=(slope - Z95 * se, slope + Z95 * se), points=int(n))


def ordinary_fit(x: np.ndarray, y: np.ndarray):
    """Plain least-squares line with slope CI"""
    result = stats.linregress(x, y)
    dof = max(len(x) - 2, 1)
    t = float(stats.t.ppf(0.975, dof))
    return result, (result.slope - t * result.stderr, result.slope + t * result.stderr)
