"""Harmonic functions h(x) = E^x[g(X_τ_D)] and their regularity"""

import itertools
import logging
import math
import time
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.models.box import AnisotropicBox
from src.models.errors import InsufficientDataError, StableDomainError
from src.models.experiment import SamplingConfig
from src.models.indices import StableIndexSet
from src.models.report import EstimateReport, HolderFit, ScanResult, SlopeFit
from src.services.coefficient_service import CoefficientField
from src.services.estimator_service import run_with_retries
from src.services.geometry_service import box_grid, contains
from src.services.scalar_field_service import ScalarField
from src.services.sde_service import ExitMonitor, resolve_settings
from src.utils.statistics import Z95, mean_report, ordinary_fit

logger = logging.getLogger(__name__)

MIN_HOLDER_PAIRS = 10
MIN_HOLDER_POINTS = 10
# a grid value is resolved when its CI is narrower than this share of the spread of h
CI_SPREAD_FRACTION = 0.25
# pairs count as informative when |Δh| exceeds this many combined SEs
PAIR_SIGNIFICANCE = 3.0


def harmonic_evaluate(g: ScalarField, domain: AnisotropicBox, x_grid, coefficients: CoefficientField,
                      indices: StableIndexSet, n: int, seed: int, sampling: Optional[SamplingConfig] = None,
                      threads: int = 1) -> List[Tuple[np.ndarray, EstimateReport]]:
    """Monte Carlo h(x) = E^x g(X_τ) on every grid point.

    g is evaluated wherever the exit lands, overshoot included, so it must be
    defined and bounded on all of R^d.
    """
    grid = np.atleast_2d(np.asarray(x_grid, dtype=float))
    if not np.all(contains(domain, grid)):
        raise StableDomainError("every grid point must lie inside the domain")
    if not np.isfinite(g.sup_norm):
        logger.warning(f"payoff {g!r} is unbounded; harmonic estimates may not exist")

    sampling = sampling or SamplingConfig(n_paths=n)
    settings = resolve_settings(sampling, domain)
    starts = np.repeat(grid, n, axis=0)
    began = time.perf_counter()
    result, censored = run_with_retries(starts, starts.shape[0], coefficients, indices,
                                        lambda: [ExitMonitor(domain)], settings, seed, threads)
    elapsed = time.perf_counter() - began
    payoff = g(result[0]["exit_state"]).reshape(grid.shape[0], n)
    cens = result[0]["censored"].reshape(grid.shape[0], n).mean(axis=1)

    values = []
    for point, row, c in zip(grid, payoff, cens):
        values.append((point, mean_report(row, seed, elapsed / grid.shape[0], float(c))))
    logger.debug(f"Evaluated h on {grid.shape[0]} points with {n} paths each")
    return values


def fit_holder_exponent(values: Sequence[Tuple[np.ndarray, EstimateReport]], r: float,
                        indices: StableIndexSet, ci_fraction: float = CI_SPREAD_FRACTION) -> HolderFit:
    """Fit log|h(x) - h(y)| = log c + β log(|x - y| / r^(α_max/α_min)) over informative pairs.

    Needs MIN_HOLDER_POINTS grid values whose CI width is below ci_fraction
    times the spread max h - min h; otherwise the fit is refused.
    """
    if not 0.0 < ci_fraction <= 1.0:
        raise StableDomainError(f"ci_fraction must lie in (0,1], got {ci_fraction}")
    estimates = [report.estimate for _, report in values]
    spread = max(estimates) - min(estimates) if estimates else 0.0
    resolved = sum(1 for _, report in values if report.ci95[1] - report.ci95[0] < ci_fraction * spread)
    if resolved < MIN_HOLDER_POINTS:
        raise InsufficientDataError(
            f"insufficient resolution: {resolved} grid values with CI width below {ci_fraction:g}·spread, "
            f"need {MIN_HOLDER_POINTS}", count=resolved,
        )
    scale = indices.holder_scale(r)
    sup = max((abs(report.estimate) for _, report in values), default=0.0)
    dist, diff = [], []
    for (x, hx), (y, hy) in itertools.combinations(values, 2):
        gap = float(np.linalg.norm(np.asarray(x) - np.asarray(y)))
        if gap == 0.0:
            continue
        delta = abs(hx.estimate - hy.estimate)
        noise = math.hypot(hx.std_error, hy.std_error)
        if delta > PAIR_SIGNIFICANCE * noise and delta > 0:
            dist.append(gap / scale)
            diff.append(delta)

    if len(dist) < MIN_HOLDER_PAIRS:
        raise InsufficientDataError(
            f"insufficient resolution: {len(dist)} informative pairs, need {MIN_HOLDER_PAIRS}", count=len(dist)
        )
    lx, ly = np.log(dist), np.log(diff)
    fit, slope_ci = ordinary_fit(lx, ly)
    residual = float(np.sqrt(np.mean((ly - (fit.intercept + fit.slope * lx)) ** 2)))
    c_hat = float(np.exp(fit.intercept) / sup) if sup > 0 else float("nan")
    return HolderFit(
        beta_hat=float(fit.slope),
        c_hat=c_hat,
        pairs_used=len(dist),
        r_scale=scale,
        residual=residual,
        slope_ci95=(float(slope_ci[0]), float(slope_ci[1])),
    )


def oscillation_decay(x0: Sequence[float], coefficients: CoefficientField, indices: StableIndexSet,
                      g: ScalarField, rho: float, k_max: int, n: int, seed: int, r: float = 1.0,
                      points_per_axis: int = 5, sampling: Optional[SamplingConfig] = None,
                      threads: int = 1) -> ScanResult:
    """osc of h over the nested boxes M_{r ρ^k}(x0), k = 0..k_max, h harmonic in M_r(x0).

    Levels whose oscillation is within noise end the fitted range. The fit is
    log osc_k against k, so exp(slope) is the per-level contraction ratio.
    """
    if not (0.0 < rho < 1.0):
        raise StableDomainError(f"rho must lie in (0,1), got {rho}")
    if k_max < 1:
        raise StableDomainError("k_max must be at least 1")
    domain = AnisotropicBox.around(x0, r, indices)
    levels = [AnisotropicBox.around(x0, r * rho ** k, indices) for k in range(k_max + 1)]
    grids = [box_grid(level, points_per_axis, fraction=0.9) for level in levels]
    sizes = [grid.shape[0] for grid in grids]
    values = harmonic_evaluate(g, domain, np.vstack(grids), coefficients, indices, n, seed, sampling, threads)

    rows = []
    fitted = []
    truncated_at = None
    offset = 0
    for k, size in enumerate(sizes):
        level = values[offset:offset + size]
        offset += size
        est = np.array([report.estimate for _, report in level])
        se = np.array([report.std_error for _, report in level])
        hi, lo = int(np.argmax(est)), int(np.argmin(est))
        osc = float(est[hi] - est[lo])
        noise = float(math.hypot(se[hi], se[lo]))
        report = EstimateReport(
            estimate=osc, std_error=noise, ci95=(osc - Z95 * noise, osc + Z95 * noise),
            n_samples=n * size, seed=seed, wall_time=sum(rep.wall_time for _, rep in level),
        )
        rows.append((float(k), report))
        if truncated_at is None and osc <= Z95 * noise:
            truncated_at = k
        if truncated_at is None:
            fitted.append((k, osc))

    scan = ScanResult(param_name="k", rows=rows)
    if truncated_at is not None:
        scan.notes.append(f"oscillation below noise floor from k={truncated_at}; range truncated")
        logger.warning(scan.notes[-1])
    if len(fitted) < 3:
        scan.notes.append("ratio not fitted: fewer than three levels above the noise floor")
        return scan
    ks = np.array([k for k, _ in fitted], dtype=float)
    logs = np.log([osc for _, osc in fitted])
    fit, ci = ordinary_fit(ks, logs)
    scan.fit = SlopeFit(slope=float(fit.slope), intercept=float(fit.intercept), std_error=float(fit.stderr),
                        ci95=(float(ci[0]), float(ci[1])), points=len(fitted))
    scan.notes.append(
        f"contraction ratio {math.exp(fit.slope):.4g} (95% CI {math.exp(ci[0]):.4g}..{math.exp(ci[1]):.4g})"
    )
    return scan
