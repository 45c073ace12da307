"""The nonlocal generator and the jump-intensity kernel.

For a test function f the generator is

    Lf(x) = Σ_j ∫_0^∞ [f(x + h a_j) + f(x - h a_j) - 2 f(x)] c_j h^(-1-α_j) dh

with a_j the j-th column of A(x). Pairing ±h removes the compensator on
|h| ≤ 1 and gives the principal value on |h| > 1 even when α_j ≤ 1.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from src.models.box import AnisotropicBox
from src.models.errors import ConvergenceError, StableDomainError
from src.models.experiment import QuadratureConfig, SamplingConfig
from src.models.indices import StableIndexSet
from src.models.trajectory import SchemeSettings
from src.services.coefficient_service import CoefficientField
from src.services.driver_service import levy_constant
from src.services.geometry_service import BoxUnion
from src.services.scalar_field_service import ScalarField
from src.services.sde_service import TerminalMonitor, TransitionMonitor, resolve_settings, simulate_ensemble
from src.utils.rng import sub_seed

logger = logging.getLogger(__name__)

_NODES_LO, _WEIGHTS_LO = leggauss(10)
_NODES_HI, _WEIGHTS_HI = leggauss(20)
PANELS_PER_DECADE = 4
MAX_PANELS = 2 ** 17
# natural log of the largest cut-off the geometric panels can span
MAX_LOG_CUT = 600.0


@dataclass
class GeneratorValue:
    value: float
    error_estimate: float
    tail_bound: float
    per_axis: List[float] = field(default_factory=list)


def _panel_quadrature(integrand, lo: float, hi: float, tolerance: float,
                      max_refinements: int) -> Tuple[float, float]:
    """Adaptive composite Gauss-Legendre on geometric panels.

    Each panel is integrated with 10 and 20 nodes; panels whose disagreement
    exceeds their share of the target are bisected.
    """
    n_init = max(2, int(math.ceil(PANELS_PER_DECADE * math.log10(hi / lo))))
    edges = np.geomspace(lo, hi, n_init + 1)
    a, b = edges[:-1], edges[1:]
    value, error = 0.0, np.inf
    for _ in range(max_refinements):
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)
        hi_pts = mid[:, None] + half[:, None] * _NODES_HI
        lo_pts = mid[:, None] + half[:, None] * _NODES_LO
        fine = half * (integrand(hi_pts.ravel()).reshape(hi_pts.shape) @ _WEIGHTS_HI)
        coarse = half * (integrand(lo_pts.ravel()).reshape(lo_pts.shape) @ _WEIGHTS_LO)
        panel_error = np.abs(fine - coarse)
        value = float(fine.sum())
        error = float(panel_error.sum())
        target = tolerance * max(1.0, abs(value))
        if error <= target:
            return value, error

        bad = panel_error > target / (2.0 * a.size)
        if a.size + int(bad.sum()) > MAX_PANELS:
            break
        split = mid[bad]
        a = np.concatenate([a[~bad], a[bad], split])
        b = np.concatenate([b[~bad], split, b[bad]])
        order = np.argsort(a)
        a, b = a[order], b[order]
    raise ConvergenceError(
        f"generator quadrature on [{lo:g}, {hi:g}] reached error {error:.3g} "
        f"after {max_refinements} refinements", estimate=value, error=error,
    )


def _far_cut(alpha: float, c: float, q: QuadratureConfig) -> float:
    """Smallest cut R ≥ outer_cut with 2·c·2·sup|f|·R^(-α)/α ≤ tail_tolerance·sup|f|"""
    log_cut = (math.log(4.0 * c / (alpha * q.tail_tolerance))) / alpha
    if log_cut > MAX_LOG_CUT:
        raise ConvergenceError(
            f"tail below {q.tail_tolerance:g}·sup|f| needs a cut-off of 1e{log_cut / math.log(10):.0f} at α={alpha}",
            estimate=float("nan"), error=float("inf"),
        )
    return max(q.outer_cut, math.exp(log_cut))


def _axis_generator(f: ScalarField, x: np.ndarray, v: np.ndarray, alpha: float,
                    q: QuadratureConfig) -> Tuple[float, float, float]:
    c = levy_constant(alpha)
    f0 = f(x)

    def paired(h: np.ndarray) -> np.ndarray:
        pts = np.vstack([x + h[:, None] * v, x - h[:, None] * v])
        vals = f(pts)
        m = h.size
        return (vals[:m] + vals[m:] - 2.0 * f0) * c * h ** (-1.0 - alpha)

    # Taylor remainder on (0, inner_cut]: h^2 v^T D^2 f v
    curvature = f.curvature(x, v, q.inner_cut)
    inner = c * curvature * q.inner_cut ** (2.0 - alpha) / (2.0 - alpha)

    closed = f.paired_tail(x, v, alpha, q.outer_cut)
    if closed is not None:
        middle, error = _panel_quadrature(paired, q.inner_cut, q.outer_cut, q.tolerance, q.max_refinements)
        value, tail_error = closed
        tail = c * value - 2.0 * f0 * c * q.outer_cut ** (-alpha) / alpha
        tail_bound = c * tail_error
    else:
        if not np.isfinite(f.sup_norm):
            raise ConvergenceError(
                f"{f.name} is unbounded and has no closed-form tail", estimate=float("nan"), error=float("inf"),
            )
        cut = _far_cut(alpha, c, q)
        middle, error = _panel_quadrature(paired, q.inner_cut, cut, q.tolerance, q.max_refinements)
        # beyond the cut only the -2f(x) term is kept; the rest is bounded
        tail_mass = c * cut ** (-alpha) / alpha
        tail = -2.0 * f0 * tail_mass
        tail_bound = 2.0 * f.sup_norm * tail_mass

    if tail_bound > q.tail_tolerance * max(1.0, f.sup_norm):
        raise ConvergenceError(
            f"generator tail error {tail_bound:.3g} above {q.tail_tolerance:g}·sup|f| at α={alpha}",
            estimate=inner + middle + tail, error=error + tail_bound,
        )
    return inner + middle + tail, error, tail_bound


def generator_quadrature(f: ScalarField, x: Sequence[float], coefficients: CoefficientField,
                         indices: StableIndexSet, q: Optional[QuadratureConfig] = None) -> GeneratorValue:
    """Lf(x) with its quadrature error estimate and the bound on the far tail"""
    q = q or QuadratureConfig()
    x = np.asarray(x, dtype=float)
    mats = coefficients.checked_evaluate(x)
    per_axis, errors, bound = [], 0.0, 0.0
    for j, alpha in enumerate(indices.alphas):
        value, error, tail_bound = _axis_generator(f, x, mats[:, j], alpha, q)
        per_axis.append(value)
        errors += error
        bound += tail_bound
    return GeneratorValue(value=float(sum(per_axis)), error_estimate=errors, tail_bound=bound, per_axis=per_axis)


def generator_apply(f: ScalarField, x: Sequence[float], coefficients: CoefficientField,
                    indices: StableIndexSet, q: Optional[QuadratureConfig] = None) -> float:
    return generator_quadrature(f, x, coefficients, indices, q).value


def plane_wave_symbol(coefficients: CoefficientField, x: Sequence[float], xi: Sequence[float],
                      indices: StableIndexSet) -> float:
    """-Σ_j |<ξ, a_j(x)>|^{α_j}, the generator applied to y -> cos(<ξ, y - x>) at x"""
    mats = coefficients.checked_evaluate(np.asarray(x, dtype=float))
    proj = np.abs(np.asarray(xi, dtype=float) @ mats)
    return -float(np.sum(proj ** indices.as_array()))


class IntervalSlices:
    """Finite union of pairwise disjoint closed axis-aligned boxes.

    Bounds may be infinite and lower == upper gives a hyperplane slice. Every
    line meets each box in one interval, which is what makes the jump
    intensity available in closed form.
    """

    def __init__(self, lower, upper):
        self.lower = np.atleast_2d(np.asarray(lower, dtype=float))
        self.upper = np.atleast_2d(np.asarray(upper, dtype=float))
        if self.lower.shape != self.upper.shape:
            raise StableDomainError("lower and upper bounds must have the same shape")
        if np.any(self.lower > self.upper):
            raise StableDomainError("every slice needs lower <= upper on each axis")
        m = self.lower.shape[0]
        for i in range(m):
            for k in range(i + 1, m):
                lo = np.maximum(self.lower[i], self.lower[k])
                hi = np.minimum(self.upper[i], self.upper[k])
                if np.all(lo <= hi):
                    raise StableDomainError(f"slices {i} and {k} intersect")

    @classmethod
    def slab(cls, dim: int, axis: int, lo: float, hi: float = np.inf) -> "IntervalSlices":
        """{y : lo <= y_axis <= hi}, unbounded in the other axes"""
        lower = np.full(dim, -np.inf)
        upper = np.full(dim, np.inf)
        lower[axis], upper[axis] = lo, hi
        return cls(lower, upper)

    @classmethod
    def from_box(cls, box: AnisotropicBox) -> "IntervalSlices":
        return cls(box.center_array - box.halfwidths, box.center_array + box.halfwidths)

    @property
    def dim(self) -> int:
        return self.lower.shape[1]

    def __len__(self):
        return self.lower.shape[0]

    def union(self, other: "IntervalSlices") -> "IntervalSlices":
        return IntervalSlices(np.vstack([self.lower, other.lower]), np.vstack([self.upper, other.upper]))

    def __call__(self, y) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(y, dtype=float))
        inside = (pts[:, None, :] >= self.lower) & (pts[:, None, :] <= self.upper)
        return np.any(np.all(inside, axis=2), axis=1)

    def line_intervals(self, x: np.ndarray, v: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """For points x (n, d) and directions v (n, d): the (n, m) parameter
        intervals {h : x + h v in slice}; empty ones have lo > hi."""
        x = x[:, None, :]
        v = v[:, None, :]
        moving = v != 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            t_lo = (self.lower - x) / np.where(moving, v, 1.0)
            t_hi = (self.upper - x) / np.where(moving, v, 1.0)
        still_inside = (x >= self.lower) & (x <= self.upper)
        lo = np.where(moving, np.minimum(t_lo, t_hi), np.where(still_inside, -np.inf, np.inf))
        hi = np.where(moving, np.maximum(t_lo, t_hi), np.where(still_inside, np.inf, -np.inf))
        return lo.max(axis=2), hi.min(axis=2)

    def distance_to_box(self, box: AnisotropicBox) -> float:
        """Euclidean distance between the closed box and the slices"""
        lo_b = box.center_array - box.halfwidths
        hi_b = box.center_array + box.halfwidths
        gaps = np.maximum(0.0, np.maximum(self.lower - hi_b, lo_b - self.upper))
        return float(np.min(np.linalg.norm(gaps, axis=1)))

    def __repr__(self):
        return f"<IntervalSlices(slices={len(self)}, dim={self.dim})>"


def _interval_mass(lo: np.ndarray, hi: np.ndarray, alpha: float, c: float) -> np.ndarray:
    """∫_lo^hi c |h|^(-1-α) dh for intervals on one side of 0"""
    mass = np.zeros_like(lo)
    with np.errstate(divide="ignore", over="ignore"):
        pos = (lo > 0) & (hi >= lo)
        mass[pos] = c / alpha * (lo[pos] ** (-alpha) - hi[pos] ** (-alpha))
        neg = (hi < 0) & (hi >= lo)
        mass[neg] = c / alpha * ((-hi[neg]) ** (-alpha) - (-lo[neg]) ** (-alpha))
    return mass


def jump_intensity_batch(x, target: IntervalSlices, coefficients: CoefficientField,
                         indices: StableIndexSet) -> np.ndarray:
    """κ(x, E) = Σ_k ∫ 1_E(x + h a_k(x)) c_k |h|^(-1-α_k) dh for each row of x"""
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    mats = coefficients.checked_evaluate(pts)
    total = np.zeros(pts.shape[0])
    for k, alpha in enumerate(indices.alphas):
        lo, hi = target.line_intervals(pts, mats[:, :, k])
        touching = (lo <= 0.0) & (hi >= 0.0)
        if np.any(touching):
            row = int(np.argmax(np.any(touching, axis=1)))
            raise StableDomainError(
                f"target set touches x={pts[row].tolist()}; the jump kernel is not integrable there"
            )
        total += _interval_mass(lo, hi, alpha, levy_constant(alpha)).sum(axis=1)
    return total


def jump_intensity(x: Sequence[float], target: IntervalSlices, coefficients: CoefficientField,
                   indices: StableIndexSet) -> float:
    return float(jump_intensity_batch(np.asarray(x, dtype=float)[None, :], target, coefficients, indices)[0])


class IntensityKernel:
    """Picklable x -> κ(x, E) for the transition monitor"""

    def __init__(self, target: IntervalSlices, coefficients: CoefficientField, indices: StableIndexSet):
        self.target = target
        self.coefficients = coefficients
        self.indices = indices

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return jump_intensity_batch(x, self.target, self.coefficients, self.indices)


def levy_system_check(x0: Sequence[float], coefficients: CoefficientField, indices: StableIndexSet,
                      source: AnisotropicBox, target: IntervalSlices, t: float, n: int, seed: int,
                      settings: Optional[SchemeSettings] = None, threads: int = 1) -> Dict[str, float]:
    """Mean number of D -> E jumps against the mean integrated intensity on [0, t]"""
    gap = target.distance_to_box(source)
    if gap <= 0.0:
        raise StableDomainError("source box and target slices must be at positive distance")
    settings = settings or resolve_settings(SamplingConfig(horizon=t), source)
    began = time.perf_counter()
    monitor = TransitionMonitor(BoxUnion([source]), target, IntensityKernel(target, coefficients, indices))
    result = simulate_ensemble(x0, n, coefficients, indices, [monitor], settings, seed, threads)[0]
    count = result["count"].astype(float)
    integral = result["integral"]

    diff = count - integral
    se_diff = float(diff.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    degenerate = bool(count.sum() == 0 and integral.sum() == 0.0)
    z = float(diff.mean() / se_diff) if se_diff > 0 else 0.0
    if degenerate:
        logger.warning("Levy system check: no transitions and zero intensity, configuration is degenerate")
    return {
        "mean_count": float(count.mean()),
        "count_std_error": float(count.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0,
        "mean_integrated_intensity": float(integral.mean()),
        "intensity_std_error": float(integral.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0,
        "z_score": z,
        "degenerate": degenerate,
        "n_paths": n,
        "distance": gap,
        "wall_time": time.perf_counter() - began,
    }


def dynkin_check(f: ScalarField, x0: Sequence[float], coefficients: CoefficientField,
                 indices: StableIndexSet, t_list: Sequence[float], n: int, seed: int,
                 threshold: float = 0.05, steps: int = 20, threads: int = 1,
                 q: Optional[QuadratureConfig] = None) -> List[Dict[str, float]]:
    """(E f(X_t) - f(x0)) / t for each t against Lf(x0)"""
    x0 = np.asarray(x0, dtype=float)
    generator = generator_apply(f, x0, coefficients, indices, q)
    f0 = f(x0)
    rows = []
    for i, t in enumerate(t_list):
        if t <= 0:
            raise StableDomainError(f"times must be positive, got {t}")
        settings = SchemeSettings(horizon=float(t), grid=float(t) / steps, threshold=threshold)
        monitor = TerminalMonitor(t)
        began = time.perf_counter()
        result = simulate_ensemble(x0, n, coefficients, indices, [monitor], settings,
                                   sub_seed(seed, i), threads)[0]
        quotient = (f(result["state"]) - f0) / t
        mean = float(quotient.mean())
        se = float(quotient.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        rows.append({
            "t": float(t),
            "quotient": mean,
            "std_error": se,
            "generator": generator,
            "discrepancy": abs(mean - generator),
            "n_paths": n,
            "wall_time": time.perf_counter() - began,
        })
        logger.debug(f"Dynkin t={t}: quotient={mean:.5f} ± {se:.5f}, Lf={generator:.5f}")
    return rows
