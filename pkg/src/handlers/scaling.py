"""Scaling experiments: exit times, big-jump exits and the landing profile"""

import logging
from typing import Any, Dict, List

from src.handlers.common import point_param
from src.lab.registry import ExperimentRegistry, ParamSpec
from src.models.experiment import ExperimentConfig
from src.models.indices import StableIndexSet
from src.models.report import ExperimentOutcome
from src.services.coefficient_service import CoefficientField
from src.services.estimator_service import estimate_big_jump_exit, estimate_exit_time, exit_landing_profile

logger = logging.getLogger(__name__)

EXIT_TIME_PARAMS = (
    ParamSpec("x0", "point", help="starting point, default origin"),
    ParamSpec("center", "point", help="box centre, default x0"),
    ParamSpec("r_list", "float_list", required=True, help="box scales in (0,1]"),
)

JUMP_EXIT_PARAMS = (
    ParamSpec("x0", "point"),
    ParamSpec("r", "float", required=True, help="scale of the box being exited"),
    ParamSpec("R_list", "float_list", required=True, help="outer scales, each ≥ 2r"),
)

LANDING_PARAMS = (
    ParamSpec("x0", "point"),
    ParamSpec("r", "float", default=1.0),
    ParamSpec("rho", "float", default=0.5, help="ratio of consecutive nested boxes"),
    ParamSpec("depth", "int", default=4, help="number of nested levels"),
)


def _scale_problems(name: str, values) -> List[str]:
    return [f"{name}: {v} must lie in (0,1]" for v in values if not 0 < v <= 1]


def check_exit_time(params: Dict[str, Any], indices: StableIndexSet) -> List[str]:
    return _scale_problems("r_list", params["r_list"])


def check_jump_exit(params: Dict[str, Any], indices: StableIndexSet) -> List[str]:
    r = params["r"]
    problems = _scale_problems("r", [r]) + _scale_problems("R_list", params["R_list"])
    problems += [f"R_list: R={R} violates the hypothesis R ≥ 2r (r={r})" for R in params["R_list"] if R < 2 * r]
    return problems


def check_landing(params: Dict[str, Any], indices: StableIndexSet) -> List[str]:
    problems = _scale_problems("r", [params["r"]])
    if not 0 < params["rho"] < 1:
        problems.append("rho: must lie in (0,1)")
    if params["depth"] < 1:
        problems.append("depth: must be at least 1")
    return problems


def register_scaling_experiments(registry: ExperimentRegistry):
    """Register exit-time, jump-exit and landing-profile"""

    @registry.experiment("exit-time", params=EXIT_TIME_PARAMS, check=check_exit_time, log_scale=True)
    def run_exit_time(config: ExperimentConfig, coefficients: CoefficientField) -> ExperimentOutcome:
        """Mean exit time of M_r against r; slope should approach α_max"""
        x0 = point_param(config, "x0")
        center = config.params.get("center")
        scan = estimate_exit_time(x0, coefficients, config.indices, config.params["r_list"],
                                  config.sampling.n_paths, config.seed, config.sampling, config.threads, center)
        outcome = ExperimentOutcome(config.experiment, log_scale=True)
        outcome.add_scan(scan)
        outcome.extras["expected_slope"] = config.indices.alpha_max
        return outcome

    @registry.experiment("jump-exit", params=JUMP_EXIT_PARAMS, check=check_jump_exit, log_scale=True)
    def run_jump_exit(config: ExperimentConfig, coefficients: CoefficientField) -> ExperimentOutcome:
        """Probability of leaving M_R when exiting M_r; slope should approach -α_max"""
        p = config.params
        scan = estimate_big_jump_exit(point_param(config, "x0"), coefficients, config.indices, p["r"], p["R_list"],
                                      config.sampling.n_paths, config.seed, config.sampling, config.threads)
        outcome = ExperimentOutcome(config.experiment, log_scale=True)
        outcome.add_scan(scan)
        outcome.extras["expected_slope"] = -config.indices.alpha_max
        return outcome

    @registry.experiment("landing-profile", params=LANDING_PARAMS, check=check_landing)
    def run_landing_profile(config: ExperimentConfig, coefficients: CoefficientField) -> ExperimentOutcome:
        """Where exits from the innermost nested box land"""
        p = config.params
        scan = exit_landing_profile(point_param(config, "x0"), coefficients, config.indices, p["r"], p["rho"],
                                    p["depth"], config.sampling.n_paths, config.seed, config.sampling,
                                    config.threads)
        outcome = ExperimentOutcome(config.experiment)
        outcome.add_scan(scan)
        outcome.extras["expected_slope"] = config.indices.alpha_max
        return outcome
