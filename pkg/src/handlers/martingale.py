"""Martingale identities: the Lévy system and Dynkin's formula"""

import logging
import math
import time
from typing import Any, Dict, List

import numpy as np

from src.handlers.common import add_report, moment_report, point_param, point_report
from src.lab.registry import ExperimentRegistry, ParamSpec
from src.models.box import AnisotropicBox
from src.models.errors import StableDomainError
from src.models.experiment import ExperimentConfig
from src.models.indices import StableIndexSet
from src.models.report import ExperimentOutcome
from src.services.coefficient_service import CoefficientField
from src.services.operator_service import (
    IntervalSlices,
    dynkin_check,
    generator_quadrature,
    levy_system_check,
    plane_wave_symbol,
)
from src.services.scalar_field_service import CosineField, build_scalar_field

logger = logging.getLogger(__name__)

Z_LIMIT = 3.0
GENERATOR_TOLERANCE = 1e-4

LEVY_SYSTEM_PARAMS = (
    ParamSpec("x0", "point"),
    ParamSpec("source_center", "point", help="centre of the source box D, default origin"),
    ParamSpec("source_r", "float", default=1.0),
    ParamSpec("target_axis", "int", default=0, help="axis of the target slab E"),
    ParamSpec("target_lo", "float", help="lower end of the slab E, give this or target_distance"),
    ParamSpec("target_distance", "float", help="gap from the upper face of D to E along target_axis"),
    ParamSpec("target_hi", "float", help="upper end of the slab, unbounded when omitted"),
    ParamSpec("t", "float", default=1.0),
)

DYNKIN_PARAMS = (
    ParamSpec("x0", "point"),
    ParamSpec("f", "field", help="test function, default cos(<(1,..,1), y - x0>)"),
    ParamSpec("t_list", "float_list", default=[0.01]),
    ParamSpec("threshold", "float", default=0.05, help="big-jump threshold of the short runs"),
    ParamSpec("steps", "int", default=20, help="grid steps per run"),
)


def check_levy_system(params: Dict[str, Any], indices: StableIndexSet) -> List[str]:
    problems = [] if 0 < params["source_r"] <= 1 else ["source_r: must lie in (0,1]"]
    if not 0 <= params["target_axis"] < indices.dim:
        problems.append(f"target_axis: must lie in 0..{indices.dim - 1}")
    lo, gap = params.get("target_lo"), params.get("target_distance")
    if (lo is None) == (gap is None):
        problems.append("target_lo: give exactly one of target_lo and target_distance")
    elif gap is not None and gap <= 0:
        problems.append("target_distance: must be positive")
    hi = params.get("target_hi")
    if hi is not None and lo is not None and hi < lo:
        problems.append("target_hi: must not be below target_lo")
    if params["t"] <= 0:
        problems.append("t: must be positive")
    return problems


def check_dynkin(params: Dict[str, Any], indices: StableIndexSet) -> List[str]:
    problems = [f"t_list: {t} must be positive" for t in params["t_list"] if t <= 0]
    if params["threshold"] <= 0:
        problems.append("threshold: must be positive")
    if params["steps"] < 1:
        problems.append("steps: must be at least 1")
    return problems


def analytic_generator(f, x0: np.ndarray, coefficients: CoefficientField, indices: StableIndexSet):
    """Closed form of Lf(x0) for a cosine test function, None otherwise"""
    if not isinstance(f, CosineField):
        return None
    phase = float((x0 - f.origin) @ f.xi)
    return f.amplitude * math.cos(phase) * plane_wave_symbol(coefficients, x0, f.xi, indices)


def register_martingale_experiments(registry: ExperimentRegistry):
    """Register levy-system and dynkin"""

    @registry.experiment("levy-system", params=LEVY_SYSTEM_PARAMS, check=check_levy_system)
    def run_levy_system(config: ExperimentConfig, coefficients: CoefficientField) -> ExperimentOutcome:
        """Counted D -> E jumps against the integrated jump intensity"""
        p = config.params
        source = AnisotropicBox.around(point_param(config, "source_center"), p["source_r"], config.indices)
        axis = p["target_axis"]
        lo = p.get("target_lo")
        if lo is None:
            lo = source.center_array[axis] + source.halfwidths[axis] + p["target_distance"]
        hi = np.inf if p.get("target_hi") is None else p["target_hi"]
        if hi < lo:
            raise StableDomainError(f"target_hi={hi} lies below the slab start {lo:.4g}")
        target = IntervalSlices.slab(config.dim, axis, float(lo), hi)
        check = levy_system_check(point_param(config, "x0"), coefficients, config.indices, source, target, p["t"],
                                  config.sampling.n_paths, config.seed, threads=config.threads)

        n = check["n_paths"]
        outcome = ExperimentOutcome(config.experiment)
        add_report(outcome, "count", p["t"], moment_report(check["mean_count"], check["count_std_error"], n,
                                                           config.seed, check["wall_time"]))
        add_report(outcome, "integrated_intensity", p["t"],
                   moment_report(check["mean_integrated_intensity"], check["intensity_std_error"], n, config.seed))
        z = point_report(check["z_score"], config.seed)
        z.n_samples = n
        add_report(outcome, "z_score", p["t"], z)
        outcome.extras.update(check)
        if check["degenerate"]:
            outcome.notes.append("no transitions and zero intensity: configuration is degenerate")
        elif abs(check["z_score"]) > Z_LIMIT:
            outcome.notes.append(f"|z|={abs(check['z_score']):.2f} exceeds {Z_LIMIT}")
            logger.warning(outcome.notes[-1])
        return outcome

    @registry.experiment("dynkin", params=DYNKIN_PARAMS, check=check_dynkin)
    def run_dynkin(config: ExperimentConfig, coefficients: CoefficientField) -> ExperimentOutcome:
        """Generator by quadrature, in closed form when available, and by difference quotients"""
        p = config.params
        x0 = point_param(config, "x0")
        f = build_scalar_field(p["f"]) if p.get("f") else CosineField(np.ones(config.dim), origin=x0)
        outcome = ExperimentOutcome(config.experiment)

        began = time.perf_counter()
        value = generator_quadrature(f, x0, coefficients, config.indices, config.quadrature)
        generator = point_report(value.value, config.seed, time.perf_counter() - began)
        generator.notes.append(f"error estimate {value.error_estimate:.2e}, tail bound {value.tail_bound:.2e}")
        exact = analytic_generator(f, x0, coefficients, config.indices)
        if exact is not None:
            rel = abs(value.value - exact) / abs(exact) if exact else abs(value.value)
            generator.notes.append(f"closed form {exact:.10g}, relative error {rel:.2e}")
            add_report(outcome, "symbol", 0.0, point_report(exact, config.seed))
            if rel > GENERATOR_TOLERANCE:
                outcome.notes.append(f"generator quadrature off by {rel:.2e} relative")
        add_report(outcome, "generator", 0.0, generator)

        reference = exact if exact is not None else value.value
        rows = dynkin_check(f, x0, coefficients, config.indices, p["t_list"], config.sampling.n_paths, config.seed,
                            p["threshold"], p["steps"], config.threads, config.quadrature)
        for row in rows:
            report = moment_report(row["quotient"], row["std_error"], row["n_paths"], config.seed, row["wall_time"])
            gap = abs(row["quotient"] - reference)
            report.notes.append(f"|quotient - Lf| = {gap:.4g} ({gap / row['std_error']:.2f} SE)"
                                if row["std_error"] > 0 else f"|quotient - Lf| = {gap:.4g}")
            if row["std_error"] > 0 and gap > Z_LIMIT * row["std_error"]:
                outcome.notes.append(f"difference quotient at t={row['t']:g} is {gap / row['std_error']:.1f} SE "
                                     f"from the generator")
            add_report(outcome, "t", row["t"], report)
        outcome.extras["generator"] = {"value": value.value, "error_estimate": value.error_estimate,
                                       "tail_bound": value.tail_bound, "per_axis": value.per_axis,
                                       "closed_form": exact}
        return outcome
