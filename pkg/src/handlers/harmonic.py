"""Harmonic function experiments: values, Hölder fit and oscillation decay"""

import logging
from typing import Any, Dict, List

from src.handlers.common import add_report, moment_report, point_param
from src.lab.registry import ExperimentRegistry, ParamSpec
from src.models.box import AnisotropicBox
from src.models.errors import InsufficientDataError
from src.models.experiment import ExperimentConfig
from src.models.indices import StableIndexSet
from src.models.report import ExperimentOutcome, ScanResult
from src.services.coefficient_service import CoefficientField
from src.services.geometry_service import box_grid
from src.services.harmonic_service import fit_holder_exponent, harmonic_evaluate, oscillation_decay
from src.services.scalar_field_service import build_scalar_field
from src.utils.statistics import Z95

logger = logging.getLogger(__name__)

DEFAULT_PAYOFF = {"kind": "half_space", "axis": 0, "level": 0.0}

HARMONIC_PARAMS = (
    ParamSpec("x0", "point", help="centre of the domain M_r(x0)"),
    ParamSpec("r", "float", default=1.0),
    ParamSpec("g", "field", default=DEFAULT_PAYOFF, help="exterior payoff, bounded on all of R^d"),
    ParamSpec("points_per_axis", "int", default=5),
    ParamSpec("fraction", "float", default=0.5, help="grid extent as a fraction of the halfwidths"),
)

HOLDER_PARAMS = HARMONIC_PARAMS + (
    ParamSpec("ci_fraction", "float", default=0.25,
              help="a grid value counts when its CI is narrower than this share of the spread of h"),
)

OSCILLATION_PARAMS = (
    ParamSpec("x0", "point"),
    ParamSpec("r", "float", default=1.0),
    ParamSpec("g", "field", default=DEFAULT_PAYOFF),
    ParamSpec("rho", "float", default=0.6),
    ParamSpec("k_max", "int", default=4),
    ParamSpec("points_per_axis", "int", default=5),
)


def check_harmonic(params: Dict[str, Any], indices: StableIndexSet) -> List[str]:
    problems = [] if 0 < params["r"] <= 1 else ["r: must lie in (0,1]"]
    if params["points_per_axis"] < 2:
        problems.append("points_per_axis: need at least 2")
    if not 0 < params["fraction"] < 1:
        problems.append("fraction: must lie in (0,1)")
    return problems


def check_holder(params: Dict[str, Any], indices: StableIndexSet) -> List[str]:
    problems = check_harmonic(params, indices)
    if not 0 < params["ci_fraction"] <= 1:
        problems.append("ci_fraction: must lie in (0,1]")
    return problems


def check_oscillation(params: Dict[str, Any], indices: StableIndexSet) -> List[str]:
    problems = [] if 0 < params["r"] <= 1 else ["r: must lie in (0,1]"]
    if not 0 < params["rho"] < 1:
        problems.append("rho: must lie in (0,1)")
    if params["k_max"] < 1:
        problems.append("k_max: must be at least 1")
    if params["points_per_axis"] < 2:
        problems.append("points_per_axis: need at least 2")
    return problems


def _evaluate(config: ExperimentConfig, coefficients: CoefficientField):
    p = config.params
    domain = AnisotropicBox.around(point_param(config, "x0"), p["r"], config.indices)
    grid = box_grid(domain, p["points_per_axis"], fraction=p["fraction"])
    values = harmonic_evaluate(build_scalar_field(p["g"]), domain, grid, coefficients, config.indices,
                               config.sampling.n_paths, config.seed, config.sampling, config.threads)
    return values


def register_harmonic_experiments(registry: ExperimentRegistry):
    """Register harmonic, holder and oscillation"""

    @registry.experiment("harmonic", params=HARMONIC_PARAMS, check=check_harmonic)
    def run_harmonic(config: ExperimentConfig, coefficients: CoefficientField) -> ExperimentOutcome:
        """h(x) = E^x g(X_τ) on a grid inside M_r(x0)"""
        values = _evaluate(config, coefficients)
        outcome = ExperimentOutcome(config.experiment)
        for i, (point, report) in enumerate(values):
            report.notes.append(f"x={point.tolist()}")
            add_report(outcome, "point", i, report)
        outcome.extras["points"] = [point.tolist() for point, _ in values]
        return outcome

    @registry.experiment("holder", params=HOLDER_PARAMS, check=check_holder)
    def run_holder(config: ExperimentConfig, coefficients: CoefficientField) -> ExperimentOutcome:
        """Fit |h(x) - h(y)| ≤ c (|x - y| / r^(α_max/α_min))^β"""
        values = _evaluate(config, coefficients)
        outcome = ExperimentOutcome(config.experiment)
        scan = ScanResult("point", [(float(i), report) for i, (_, report) in enumerate(values)])
        outcome.add_scan(scan)
        outcome.extras["points"] = [point.tolist() for point, _ in values]
        try:
            fit = fit_holder_exponent(values, config.params["r"], config.indices, config.params["ci_fraction"])
        except InsufficientDataError as e:
            outcome.notes.append(str(e))
            logger.warning(f"Holder fit skipped: {e}")
            return outcome

        se = (fit.slope_ci95[1] - fit.slope_ci95[0]) / (2.0 * Z95)
        report = moment_report(fit.beta_hat, se, fit.pairs_used, config.seed)
        report.ci95 = fit.slope_ci95
        report.notes.append(f"c_hat={fit.c_hat:.4g}, residual={fit.residual:.4g}, r_scale={fit.r_scale:.4g}")
        add_report(outcome, "beta", fit.pairs_used, report)
        outcome.extras["holder"] = vars(fit)
        if fit.slope_ci95[0] <= 0:
            outcome.notes.append("regression slope is not positive with 95% confidence")
        return outcome

    @registry.experiment("oscillation", params=OSCILLATION_PARAMS, check=check_oscillation)
    def run_oscillation(config: ExperimentConfig, coefficients: CoefficientField) -> ExperimentOutcome:
        """Oscillation of h over nested boxes M_{r ρ^k}(x0)"""
        p = config.params
        scan = oscillation_decay(point_param(config, "x0"), coefficients, config.indices,
                                 build_scalar_field(p["g"]), p["rho"], p["k_max"], config.sampling.n_paths,
                                 config.seed, p["r"], p["points_per_axis"], config.sampling, config.threads)
        outcome = ExperimentOutcome(config.experiment)
        outcome.add_scan(scan)
        if scan.fit is not None:
            outcome.extras["contracting"] = bool(scan.fit.ci95[1] < 0)
        return outcome
