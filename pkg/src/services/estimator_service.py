"""Monte Carlo estimators for exit, jump, tube and hitting events"""

import logging
import time
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from src.lab.config import config
from src.models.box import AnisotropicBox
from src.models.errors import CensoringError, StableDomainError
from src.models.experiment import SamplingConfig
from src.models.indices import StableIndexSet
from src.models.report import EstimateReport, ScanResult
from src.models.trajectory import SchemeSettings
from src.services.coefficient_service import CoefficientField
from src.services.geometry_service import BoxUnion, box_grid, box_inside, contains
from src.services.sde_service import (
    EnsembleResult,
    ExitMonitor,
    HitMonitor,
    JumpEventMonitor,
    PathMonitor,
    TerminalMonitor,
    TubeMonitor,
    resolve_settings,
    simulate_ensemble,
)
from src.utils.rng import sub_seed
from src.utils.statistics import mean_report, proportion_report, weighted_loglog_fit

logger = logging.getLogger(__name__)


class PolylineCurve:
    """Piecewise linear φ: [0, t_end] -> R^d through (time, point) nodes"""

    def __init__(self, times: Sequence[float], points):
        self.times = np.asarray(times, dtype=float)
        self.points = np.atleast_2d(np.asarray(points, dtype=float))
        if self.times.ndim != 1 or self.times.size != self.points.shape[0]:
            raise StableDomainError("a polyline needs one time per node")
        if self.times[0] != 0.0 or np.any(np.diff(self.times) <= 0):
            raise StableDomainError("polyline times must start at 0 and increase strictly")

    @classmethod
    def segment(cls, x0: Sequence[float], direction: Sequence[float], length: float,
                t_end: float) -> "PolylineCurve":
        """Constant-speed segment from x0 of the given length along direction"""
        unit = np.asarray(direction, dtype=float)
        norm = float(np.linalg.norm(unit))
        if norm == 0.0:
            raise StableDomainError("segment direction must be non-zero")
        start = np.asarray(x0, dtype=float)
        return cls([0.0, t_end], [start, start + length * unit / norm])

    @classmethod
    def constant(cls, x0: Sequence[float], t_end: float) -> "PolylineCurve":
        return cls([0.0, t_end], [x0, x0])

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    @property
    def start(self) -> np.ndarray:
        return self.points[0]

    def __call__(self, t: np.ndarray) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.column_stack([np.interp(t, self.times, self.points[:, i]) for i in range(self.points.shape[1])])


def run_with_retries(x0, n: int, coefficients: CoefficientField, indices: StableIndexSet,
                     build: Callable[[], List[PathMonitor]], settings: SchemeSettings, seed: int,
                     threads: int = 1, watch: int = 0) -> Tuple[EnsembleResult, float]:
    """Run an ensemble, doubling the horizon while monitor `watch` censors too many paths"""
    for attempt in range(config.MAX_HORIZON_RETRIES + 1):
        result = simulate_ensemble(x0, n, coefficients, indices, build(), settings, seed, threads)
        censored = float(np.mean(result[watch]["censored"]))
        if censored <= config.MAX_CENSORED_FRACTION:
            if attempt:
                result.notes.append(f"horizon widened to {settings.horizon:.4g}")
            return result, censored
        if attempt == config.MAX_HORIZON_RETRIES:
            break
        logger.warning(
            f"{censored:.2%} of paths censored at horizon {settings.horizon:.4g}; doubling the horizon"
        )
        settings = settings.with_horizon(2.0 * settings.horizon)
    raise CensoringError(
        f"{censored:.2%} of paths still censored at horizon {settings.horizon:.4g} "
        f"after {config.MAX_HORIZON_RETRIES} retries",
        censored_fraction=censored, horizon=settings.horizon,
    )


def _check_scale(r: float) -> None:
    if not (0.0 < r <= 1.0):
        raise StableDomainError(f"scale r={r} must lie in (0,1]")


def estimate_exit_time(x0: Sequence[float], coefficients: CoefficientField, indices: StableIndexSet,
                       r_list: Sequence[float], n: int, seed: int,
                       sampling: Optional[SamplingConfig] = None, threads: int = 1,
                       center: Optional[Sequence[float]] = None) -> ScanResult:
    """Mean exit time of M_r(center) from x0 for each r, with the log-log slope.

    The box is centred at x0 unless `center` is given.
    """
    sampling = sampling or SamplingConfig(n_paths=n)
    center = x0 if center is None else center
    rows: List[Tuple[float, EstimateReport]] = []
    for i, r in enumerate(r_list):
        _check_scale(r)
        box = AnisotropicBox.around(center, r, indices)
        settings = resolve_settings(sampling, box)
        began = time.perf_counter()
        result, censored = run_with_retries(
            x0, n, coefficients, indices, lambda: [ExitMonitor(box)], settings, sub_seed(seed, i), threads
        )
        report = mean_report(result[0]["exit_time"], seed, time.perf_counter() - began, censored)
        report.notes.extend(result.notes)
        rows.append((float(r), report))
        logger.info(f"exit-time r={r}: E[tau]={report.estimate:.5g} ± {report.std_error:.2g}")

    scan = ScanResult(param_name="r", rows=rows)
    _attach_fit(scan, [r for r, _ in rows], rows)
    return scan


def _attach_fit(scan: ScanResult, x: Sequence[float], rows) -> None:
    y = [report.estimate for _, report in rows]
    se = [report.std_error for _, report in rows]
    positive = sum(1 for value in y if value > 0)
    if positive < 2:
        scan.notes.append("slope not fitted: fewer than two positive estimates")
        return
    scan.fit = weighted_loglog_fit(x, y, se)


def estimate_big_jump_exit(x0: Sequence[float], coefficients: CoefficientField, indices: StableIndexSet,
                           r: float, R_list: Sequence[float], n: int, seed: int,
                           sampling: Optional[SamplingConfig] = None, threads: int = 1) -> ScanResult:
    """P(X_τ ∉ M_R(x0)) for the exit τ from M_r(x0), all R from one ensemble"""
    _check_scale(r)
    for R in R_list:
        if R < 2.0 * r:
            raise StableDomainError(f"R={R} violates the hypothesis R ≥ 2r (r={r})")
        _check_scale(R)
    sampling = sampling or SamplingConfig(n_paths=n)
    box = AnisotropicBox.around(x0, r, indices)
    settings = resolve_settings(sampling, box)
    began = time.perf_counter()
    result, censored = run_with_retries(x0, n, coefficients, indices, lambda: [ExitMonitor(box)],
                                        settings, seed, threads)
    elapsed = time.perf_counter() - began
    exit_state = result[0]["exit_state"]
    exited = ~result[0]["censored"]

    rows = []
    for R in sorted(R_list):
        outer = AnisotropicBox.around(x0, R, indices)
        far = int(np.count_nonzero(exited & ~contains(outer, exit_state)))
        report = proportion_report(far, n, seed, elapsed, censored)
        rows.append((float(R), report))

    scan = ScanResult(param_name="R", rows=rows)
    largest = rows[-1][1]
    if round(largest.estimate * n) < config.MIN_TAIL_EVENTS:
        note = f"insufficient tail events at R={rows[-1][0]:g} ({round(largest.estimate * n)})"
        largest.notes.append(note)
        scan.notes.append(note)
        logger.warning(note)
    _attach_fit(scan, [R for R, _ in rows], rows)
    return scan


def estimate_targeted_jump(x0: Sequence[float], coefficients: CoefficientField, indices: StableIndexSet,
                           axis: int, xi: float, gamma: float, t0: float, n: int, seed: int,
                           r: float = 1.0, sampling: Optional[SamplingConfig] = None,
                           threads: int = 1) -> EstimateReport:
    """P(stay γ-close to x0 until the first big jump of driver `axis`, then
    γ-close to x0 + ξ A(x0) e_axis up to t0)"""
    _check_scale(r)
    scale = indices.holder_scale(r)
    if not (0.0 < gamma < scale):
        raise StableDomainError(f"closeness radius {gamma} must lie in (0, r^(α_max/α_min)={scale:.4g})")
    if abs(xi) > scale:
        raise StableDomainError(f"jump length {xi} must lie in [-{scale:.4g}, {scale:.4g}]")
    if not (0 <= axis < indices.dim):
        raise StableDomainError(f"axis {axis} out of range for d={indices.dim}")
    if t0 <= 0:
        raise StableDomainError(f"t0 must be positive, got {t0}")

    sampling = sampling or SamplingConfig(n_paths=n)
    x0 = np.asarray(x0, dtype=float)
    direction = coefficients.checked_evaluate(x0)[:, axis]
    threshold = sampling.jump_threshold or (0.5 * min(gamma, abs(xi)) if xi else 0.5 * gamma)
    settings = SchemeSettings(horizon=t0, grid=min(sampling.grid or t0 / 100.0, t0), threshold=threshold)

    began = time.perf_counter()
    monitor = JumpEventMonitor(x0, axis, xi, gamma, t0, direction)
    result = simulate_ensemble(x0, n, coefficients, indices, [monitor], settings, seed, threads)[0]
    successes = int(np.count_nonzero(result["success"]))
    return proportion_report(successes, n, seed, time.perf_counter() - began)


def _tube_settings(sampling: SamplingConfig, t_end: float, epsilon: float) -> SchemeSettings:
    grid = min(sampling.grid or t_end / 100.0, t_end)
    threshold = sampling.jump_threshold or 0.1 * epsilon
    return SchemeSettings(horizon=t_end, grid=grid, threshold=threshold)


def _check_tube(curve: PolylineCurve, x0: np.ndarray, epsilon: float, r: float,
                indices: StableIndexSet) -> None:
    _check_scale(r)
    if not np.allclose(curve.start, x0):
        raise StableDomainError("the curve must start at x0")
    scale = indices.holder_scale(r)
    if not (0.0 < epsilon < scale):
        raise StableDomainError(f"epsilon {epsilon} must lie in (0, r^(α_max/α_min)={scale:.4g})")
    box = AnisotropicBox.around(x0, r, indices)
    if not np.all(contains(box, curve.points)):
        raise StableDomainError(f"the curve leaves M_r(x0) for r={r}")


def estimate_tube_probability(x0: Sequence[float], coefficients: CoefficientField, indices: StableIndexSet,
                              curve: PolylineCurve, epsilon: float, n: int, seed: int, r: float = 1.0,
                              sampling: Optional[SamplingConfig] = None, threads: int = 1) -> EstimateReport:
    """P(|X_s - φ(s)| < ε at every monitored s ≤ t0)"""
    x0 = np.asarray(x0, dtype=float)
    _check_tube(curve, x0, epsilon, r, indices)
    settings = _tube_settings(sampling or SamplingConfig(n_paths=n), curve.t_end, epsilon)
    began = time.perf_counter()
    monitor = TubeMonitor(curve, epsilon, curve.t_end)
    result = simulate_ensemble(x0, n, coefficients, indices, [monitor], settings, seed, threads)[0]
    return proportion_report(int(np.count_nonzero(result["inside"])), n, seed, time.perf_counter() - began)


def estimate_segment_tube(x0: Sequence[float], coefficients: CoefficientField, indices: StableIndexSet,
                          direction: Sequence[float], length: float, epsilon: float, end_radius: float,
                          t1: float, n: int, seed: int, r: float = 1.0,
                          sampling: Optional[SamplingConfig] = None, threads: int = 1) -> EstimateReport:
    """P(tube of radius ε around the segment ψ on [0, t1] and |X_{t1} - ψ(t1)| < end_radius)"""
    if end_radius <= 0:
        raise StableDomainError(f"end_radius must be positive, got {end_radius}")
    x0 = np.asarray(x0, dtype=float)
    curve = PolylineCurve.segment(x0, direction, length, t1)
    _check_tube(curve, x0, epsilon, r, indices)
    settings = _tube_settings(sampling or SamplingConfig(n_paths=n), t1, min(epsilon, end_radius))
    began = time.perf_counter()
    monitors = [TubeMonitor(curve, epsilon, t1), TerminalMonitor(t1)]
    tube, terminal = simulate_ensemble(x0, n, coefficients, indices, monitors, settings, seed, threads).results
    close = np.linalg.norm(terminal["state"] - curve(np.array([t1]))[0], axis=1) < end_radius
    success = tube["inside"] & terminal["reached"] & close
    return proportion_report(int(np.count_nonzero(success)), n, seed, time.perf_counter() - began)


def _as_union(target) -> BoxUnion:
    if isinstance(target, BoxUnion):
        return target
    if isinstance(target, AnisotropicBox):
        return BoxUnion([target])
    return BoxUnion(list(target))


def estimate_hitting(x0: Sequence[float], coefficients: CoefficientField, indices: StableIndexSet,
                     target, enclosing: AnisotropicBox, n: int, seed: int,
                     sampling: Optional[SamplingConfig] = None, threads: int = 1) -> EstimateReport:
    """P(T_target < τ_M) for a finite union of boxes inside M"""
    union = _as_union(target)
    x0 = np.asarray(x0, dtype=float)
    if not contains(enclosing.with_dilation(0.5 * enclosing.k), x0):
        raise StableDomainError("x0 must lie in the half-dilation box M^(1/2)")
    for box in union.boxes:
        if box.volume <= 0.0:
            raise StableDomainError("target boxes must have positive volume")
        if not box_inside(box, enclosing):
            raise StableDomainError(f"target box {box!r} is not contained in the enclosing box")

    sampling = sampling or SamplingConfig(n_paths=n)
    settings = resolve_settings(sampling, enclosing)
    began = time.perf_counter()
    result, censored = run_with_retries(
        x0, n, coefficients, indices, lambda: [HitMonitor(union, enclosing)], settings, seed, threads
    )
    hits = int(np.count_nonzero(result[0]["hit"]))
    report = proportion_report(hits, n, seed, time.perf_counter() - began, censored)
    report.notes.extend(result.notes)
    return report


def estimate_corner_hitting(center: Sequence[float], coefficients: CoefficientField, indices: StableIndexSet,
                            r: float, eps: float, delta: float, y: Sequence[float], n: int, seed: int,
                            points_per_axis: int = 3, sampling: Optional[SamplingConfig] = None,
                            threads: int = 1) -> ScanResult:
    """P(hit M_r^δ(y) before leaving M_r(center)) from starting points spread
    over M_r^k(center), k = 1 - ε / r^(α_max/α_min); rows are per start."""
    _check_scale(r)
    scale = indices.holder_scale(r)
    if not 0.0 < eps < scale / 4.0:
        raise StableDomainError(f"eps={eps} must lie in (0, r^(α_max/α_min)/4) = (0, {scale / 4.0:.4g})")
    if not eps < delta < scale / 2.0:
        raise StableDomainError(f"delta={delta} must lie in (eps, r^(α_max/α_min)/2) = ({eps:g}, {scale / 2.0:.4g})")
    k = 1.0 - eps / scale
    enclosing = AnisotropicBox.around(center, r, indices)
    inner = enclosing.with_dilation(k)
    target = AnisotropicBox.around(y, r, indices, k=delta)
    if not box_inside(target, inner):
        raise StableDomainError("target M_r^δ(y) must lie inside M_r^k(center)")

    sampling = sampling or SamplingConfig(n_paths=n)
    settings = resolve_settings(sampling, enclosing)
    union = BoxUnion([target])
    starts = box_grid(inner, points_per_axis, fraction=0.999)
    rows = []
    for i, start in enumerate(starts):
        began = time.perf_counter()
        result, censored = run_with_retries(
            start, n, coefficients, indices, lambda: [HitMonitor(union, enclosing)], settings,
            sub_seed(seed, i), threads,
        )
        hits = int(np.count_nonzero(result[0]["hit"]))
        rows.append((float(i), proportion_report(hits, n, seed, time.perf_counter() - began, censored)))

    scan = ScanResult(param_name="start", rows=rows)
    worst = min(rows, key=lambda row: row[1].lower)
    scan.notes.append(f"smallest lower bound {worst[1].lower:.4g} at start {starts[int(worst[0])].tolist()}")
    return scan


def exit_landing_profile(x0: Sequence[float], coefficients: CoefficientField, indices: StableIndexSet,
                         r: float, rho: float, depth: int, n: int, seed: int,
                         sampling: Optional[SamplingConfig] = None, threads: int = 1) -> ScanResult:
    """Exit from the innermost of the nested boxes M_{r ρ^j}(x0), j = 0..depth, and
    the probability of landing outside M_{r ρ^(depth-i)} for i = 1..depth.

    The probabilities should decay like ρ^(i α_max); the fit is against ρ^i.
    """
    _check_scale(r)
    if not (0.0 < rho < 1.0):
        raise StableDomainError(f"rho must lie in (0,1), got {rho}")
    if depth < 1:
        raise StableDomainError("depth must be at least 1")
    sampling = sampling or SamplingConfig(n_paths=n)
    innermost = AnisotropicBox.around(x0, r * rho ** depth, indices)
    settings = resolve_settings(sampling, innermost)
    began = time.perf_counter()
    result, censored = run_with_retries(x0, n, coefficients, indices, lambda: [ExitMonitor(innermost)],
                                        settings, seed, threads)
    elapsed = time.perf_counter() - began
    exit_state = result[0]["exit_state"]
    exited = ~result[0]["censored"]

    rows = []
    for i in range(1, depth + 1):
        outer = AnisotropicBox.around(x0, r * rho ** (depth - i), indices)
        far = int(np.count_nonzero(exited & ~contains(outer, exit_state)))
        rows.append((float(i), proportion_report(far, n, seed, elapsed, censored)))

    scan = ScanResult(param_name="i", rows=rows)
    _attach_fit(scan, [rho ** i for i, _ in rows], rows)
    if scan.fit is not None:
        scan.notes.append(f"expected slope α_max={indices.alpha_max:g}")
    return scan
