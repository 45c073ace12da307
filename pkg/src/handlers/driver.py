"""Driver self-test: CMS sampling, symbol identity and the big/small jump split"""

import logging
import math
import time
from typing import Any, Dict, List

import numpy as np

from src.handlers.common import add_report, moment_report, point_report
from src.lab.registry import ExperimentRegistry, ParamSpec
from src.models.experiment import ExperimentConfig
from src.models.indices import StableIndexSet
from src.models.report import ExperimentOutcome
from src.services.coefficient_service import CoefficientField
from src.services.driver_service import (
    big_jump_rate,
    characteristic_function_check,
    decompose_jumps,
    small_jump_variance_rate,
    symbol_quadrature,
)
from src.utils.rng import path_rng, sub_seed

logger = logging.getLogger(__name__)

SYMBOL_TOLERANCE = 1e-6
Z_LIMIT = 3.0

DRIVER_PARAMS = (
    ParamSpec("gammas", "float_list", default=[0.5, 1.0, 1.5], help="stability indices to test"),
    ParamSpec("xis", "float_list", default=[0.5, 1.0, 2.0], help="frequencies of the characteristic function"),
    ParamSpec("dt", "float", default=1.0, help="time of the sampled increment"),
    ParamSpec("threshold", "float", default=0.5, help="big-jump threshold of the decomposition check"),
    ParamSpec("horizon", "float", default=1.0, help="time span of the decomposition check"),
    ParamSpec("grid", "float", default=0.1, help="grid step of the small component"),
    ParamSpec("decomposition_paths", "int", default=20_000, help="paths in the decomposition check"),
)


def check_driver(params: Dict[str, Any], indices: StableIndexSet) -> List[str]:
    problems = [f"gammas: {g} must lie in the open interval (0,2)" for g in params["gammas"] if not 0 < g < 2]
    if params["dt"] <= 0:
        problems.append("dt: must be positive")
    if params["threshold"] <= 0:
        problems.append("threshold: must be positive")
    if not (0 < params["grid"] <= params["horizon"]):
        problems.append("grid: must lie in (0, horizon]")
    if params["decomposition_paths"] < 2:
        problems.append("decomposition_paths: need at least two paths")
    return problems


def register_driver_experiments(registry: ExperimentRegistry):
    """Register the driver self-test"""

    @registry.experiment("driver-selftest", params=DRIVER_PARAMS, check=check_driver, uses_simulation=False)
    def run_driver_selftest(config: ExperimentConfig, coefficients: CoefficientField) -> ExperimentOutcome:
        """Characteristic function, symbol quadrature and jump decomposition checks"""
        p = config.params
        n = config.sampling.n_paths
        outcome = ExperimentOutcome(config.experiment)
        failures = 0

        for i, gamma in enumerate(p["gammas"]):
            for j, xi in enumerate(p["xis"]):
                began = time.perf_counter()
                check = characteristic_function_check(gamma, xi, n, path_rng(sub_seed(config.seed, i, j), 0), p["dt"])
                report = moment_report(check["estimate"], check["std_error"], n, config.seed,
                                       time.perf_counter() - began)
                report.notes.append(f"exact {check['exact']:.8g}, z={check['z']:.3f}")
                if abs(check["z"]) > Z_LIMIT:
                    failures += 1
                    report.notes.append(f"|z| above {Z_LIMIT}")
                add_report(outcome, f"cf_gamma={gamma:g}", xi, report)

        for gamma in p["gammas"]:
            for xi in p["xis"]:
                began = time.perf_counter()
                value = symbol_quadrature(gamma, xi)
                exact = abs(xi) ** gamma
                report = point_report(value, config.seed, time.perf_counter() - began)
                rel = abs(value - exact) / exact
                report.notes.append(f"exact {exact:.10g}, relative error {rel:.2e}")
                if rel > SYMBOL_TOLERANCE:
                    failures += 1
                add_report(outcome, f"symbol_gamma={gamma:g}", xi, report)

        m = p["decomposition_paths"]
        for i, gamma in enumerate(p["gammas"]):
            rng = path_rng(sub_seed(config.seed, 1000 + i), 0)
            began = time.perf_counter()
            parts = [decompose_jumps(gamma, p["threshold"], p["horizon"], p["grid"], rng) for _ in range(m)]
            elapsed = time.perf_counter() - began
            counts = np.array([part.big_jump_count for part in parts], dtype=float)
            qv = np.array([part.quadratic_variation() for part in parts])

            expected_count = big_jump_rate(gamma, p["threshold"]) * p["horizon"]
            count_report = moment_report(counts.mean(), counts.std(ddof=1) / math.sqrt(m), m, config.seed, elapsed)
            z = (counts.mean() - expected_count) / count_report.std_error if count_report.std_error > 0 else 0.0
            count_report.notes.append(f"exact {expected_count:.8g}, z={z:.3f}")
            expected_qv = small_jump_variance_rate(gamma, p["threshold"]) * p["horizon"]
            qv_report = moment_report(qv.mean(), qv.std(ddof=1) / math.sqrt(m), m, config.seed, elapsed)
            rel = abs(qv.mean() - expected_qv) / expected_qv
            qv_report.notes.append(f"exact {expected_qv:.8g}, relative error {rel:.3%}")
            if abs(z) > Z_LIMIT or rel > 0.05:
                failures += 1
            add_report(outcome, f"big_jumps_gamma={gamma:g}", p["threshold"], count_report)
            add_report(outcome, f"small_qv_gamma={gamma:g}", p["threshold"], qv_report)

        outcome.extras["failed_checks"] = failures
        if failures:
            outcome.notes.append(f"{failures} driver check(s) outside tolerance")
            logger.warning(outcome.notes[-1])
        else:
            outcome.notes.append("all driver checks within tolerance")
        return outcome
