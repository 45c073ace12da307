"""Support experiments: targeted jumps, tubes and hitting probabilities"""

import logging
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from src.handlers.common import boxes_param, point_param, polyline_param
from src.lab.registry import ExperimentRegistry, ParamSpec
from src.models.box import AnisotropicBox
from src.models.experiment import ExperimentConfig
from src.models.indices import StableIndexSet
from src.models.report import EstimateReport, ExperimentOutcome, ScanResult
from src.services.coefficient_service import CoefficientField
from src.services.estimator_service import (
    PolylineCurve,
    estimate_corner_hitting,
    estimate_hitting,
    estimate_segment_tube,
    estimate_targeted_jump,
    estimate_tube_probability,
)
from src.services.geometry_service import BoxUnion, box_grid, projection_contraction
from src.utils.rng import sub_seed

logger = logging.getLogger(__name__)

TARGETED_JUMP_PARAMS = (
    ParamSpec("x0", "point"),
    ParamSpec("axis", "int", default=0, help="driver whose first big jump is targeted"),
    ParamSpec("xi", "float", default=0.5, help="signed jump length along the column a_axis(x0)"),
    ParamSpec("gamma_list", "float_list", default=[0.2, 0.4], help="closeness radii, increasing"),
    ParamSpec("t0", "float", default=0.5),
    ParamSpec("r", "float", default=1.0),
)

TUBE_PARAMS = (
    ParamSpec("x0", "point"),
    ParamSpec("curve", "polyline", help="nodes of φ; default stays at x0 until t_end"),
    ParamSpec("t_end", "float", default=0.1, help="length of the constant curve"),
    ParamSpec("epsilon_list", "float_list", default=[0.2, 0.4], help="tube radii, increasing"),
    ParamSpec("r", "float", default=1.0),
)

SEGMENT_TUBE_PARAMS = (
    ParamSpec("x0", "point"),
    ParamSpec("direction", "vector", required=True),
    ParamSpec("length", "float", default=0.3),
    ParamSpec("epsilon_list", "float_list", default=[0.2, 0.4]),
    ParamSpec("end_radius", "float", default=0.2),
    ParamSpec("t1", "float", default=0.1),
    ParamSpec("r", "float", default=1.0),
)

HIT_PARAMS = (
    ParamSpec("x0", "point"),
    ParamSpec("center", "point", help="centre of the enclosing box, default origin"),
    ParamSpec("r", "float", default=1.0, help="scale of the enclosing box"),
    ParamSpec("targets", "boxes", required=True, help="disjoint target boxes inside the enclosing box"),
)

CORNER_HIT_PARAMS = (
    ParamSpec("center", "point"),
    ParamSpec("r", "float", default=1.0),
    ParamSpec("eps", "float", default=0.1, help="shrinks M_r to M_r^k, k = 1 - eps/r^(α_max/α_min)"),
    ParamSpec("delta", "float", default=0.2, help="dilation of the target box, between eps and r^(α_max/α_min)/2"),
    ParamSpec("y", "point", required=True, help="centre of the small target box"),
    ParamSpec("points_per_axis", "int", default=3),
)


def _positive(params: Dict[str, Any], *names: str) -> List[str]:
    return [f"{name}: must be positive" for name in names if params[name] <= 0]


def _scale(params: Dict[str, Any]) -> List[str]:
    return [] if 0 < params["r"] <= 1 else ["r: must lie in (0,1]"]


def _increasing(params: Dict[str, Any], name: str) -> List[str]:
    values = params[name]
    if any(v <= 0 for v in values):
        return [f"{name}: radii must be positive"]
    if any(b <= a for a, b in zip(values, values[1:])):
        return [f"{name}: must increase strictly"]
    return []


def check_targeted_jump(params: Dict[str, Any], indices: StableIndexSet) -> List[str]:
    problems = _scale(params) + _positive(params, "t0") + _increasing(params, "gamma_list")
    if not 0 <= params["axis"] < indices.dim:
        problems.append(f"axis: must lie in 0..{indices.dim - 1}")
    if not problems:
        scale = indices.holder_scale(params["r"])
        if params["gamma_list"][-1] >= scale:
            problems.append(f"gamma_list: radii must stay below r^(α_max/α_min)={scale:.4g}")
        if abs(params["xi"]) > scale:
            problems.append(f"xi: |xi| must not exceed r^(α_max/α_min)={scale:.4g}")
    return problems


def check_tube(params: Dict[str, Any], indices: StableIndexSet) -> List[str]:
    problems = _scale(params) + _positive(params, "t_end") + _increasing(params, "epsilon_list")
    if not problems and params["epsilon_list"][-1] >= indices.holder_scale(params["r"]):
        problems.append("epsilon_list: radii must stay below r^(α_max/α_min)")
    return problems


def check_segment_tube(params: Dict[str, Any], indices: StableIndexSet) -> List[str]:
    problems = check_tube({**params, "t_end": params["t1"]}, indices)
    problems += _positive(params, "length", "end_radius")
    if not any(params["direction"]):
        problems.append("direction: must be non-zero")
    return problems


def check_hit(params: Dict[str, Any], indices: StableIndexSet) -> List[str]:
    problems = _scale(params)
    boxes = boxes_param(params["targets"], indices)
    for i, a in enumerate(boxes):
        for j in range(i + 1, len(boxes)):
            b = boxes[j]
            gap = np.abs(a.center_array - b.center_array) - (a.halfwidths + b.halfwidths)
            if np.all(gap < 0):
                problems.append(f"targets: boxes {i} and {j} overlap")
    return problems


def check_corner_hit(params: Dict[str, Any], indices: StableIndexSet) -> List[str]:
    problems = _scale(params) + _positive(params, "eps", "delta", "points_per_axis")
    if problems:
        return problems
    scale = indices.holder_scale(params["r"])
    if params["eps"] >= scale / 4:
        problems.append(f"eps: must stay below r^(α_max/α_min)/4={scale / 4:.4g}")
    if not params["eps"] < params["delta"] < scale / 2:
        problems.append(f"delta: must lie strictly between eps and r^(α_max/α_min)/2={scale / 2:.4g}")
    return problems


def monotonicity_notes(scan: ScanResult) -> List[str]:
    """Nested events: each estimate may not drop below its predecessor beyond both CIs"""
    notes = []
    for (a, ra), (b, rb) in zip(scan.rows, scan.rows[1:]):
        if rb.upper < ra.lower:
            notes.append(f"monotonicity violated between {scan.param_name}={a:g} and {b:g}")
    return notes


def _positivity_notes(rows: Sequence[Tuple[float, EstimateReport]], name: str) -> List[str]:
    return [f"lower CI bound is zero at {name}={value:g}" for value, report in rows if report.lower <= 0]


def _finish(outcome: ExperimentOutcome, scan: ScanResult, monotone: bool = True,
            extra: Sequence[str] = ()) -> ExperimentOutcome:
    problems = _positivity_notes(scan.rows, scan.param_name) + list(extra)
    if monotone:
        problems += monotonicity_notes(scan)
    for note in problems:
        logger.warning(note)
    scan.notes.extend(problems)
    outcome.add_scan(scan)
    outcome.extras["checks_passed"] = not problems
    return outcome


def register_support_experiments(registry: ExperimentRegistry):
    """Register targeted-jump, tube, segment-tube, hit and corner-hit"""

    @registry.experiment("targeted-jump", params=TARGETED_JUMP_PARAMS, check=check_targeted_jump)
    def run_targeted_jump(config: ExperimentConfig, coefficients: CoefficientField) -> ExperimentOutcome:
        """Stay close, jump by ξ a_axis(x0), stay close again, for each closeness radius"""
        p = config.params
        x0 = point_param(config, "x0")
        rows = []
        for i, gamma in enumerate(p["gamma_list"]):
            report = estimate_targeted_jump(x0, coefficients, config.indices, p["axis"], p["xi"], gamma, p["t0"],
                                            config.sampling.n_paths, sub_seed(config.seed, i), p["r"],
                                            config.sampling, config.threads)
            report.seed = config.seed
            rows.append((float(gamma), report))
        return _finish(ExperimentOutcome(config.experiment), ScanResult("gamma", rows))

    @registry.experiment("tube", params=TUBE_PARAMS, check=check_tube)
    def run_tube(config: ExperimentConfig, coefficients: CoefficientField) -> ExperimentOutcome:
        """Probability of staying in an ε-tube around a curve"""
        p = config.params
        x0 = point_param(config, "x0")
        curve = polyline_param(p["curve"]) if p.get("curve") else PolylineCurve.constant(x0, p["t_end"])
        rows = []
        for i, epsilon in enumerate(p["epsilon_list"]):
            report = estimate_tube_probability(x0, coefficients, config.indices, curve, epsilon,
                                               config.sampling.n_paths, sub_seed(config.seed, i), p["r"],
                                               config.sampling, config.threads)
            report.seed = config.seed
            rows.append((float(epsilon), report))
        return _finish(ExperimentOutcome(config.experiment), ScanResult("epsilon", rows))

    @registry.experiment("segment-tube", params=SEGMENT_TUBE_PARAMS, check=check_segment_tube)
    def run_segment_tube(config: ExperimentConfig, coefficients: CoefficientField) -> ExperimentOutcome:
        """Tube around a straight segment plus closeness at its end"""
        p = config.params
        x0 = point_param(config, "x0")
        rows = []
        for i, epsilon in enumerate(p["epsilon_list"]):
            report = estimate_segment_tube(x0, coefficients, config.indices, p["direction"], p["length"], epsilon,
                                           p["end_radius"], p["t1"], config.sampling.n_paths,
                                           sub_seed(config.seed, i), p["r"], config.sampling, config.threads)
            report.seed = config.seed
            rows.append((float(epsilon), report))
        outcome = ExperimentOutcome(config.experiment)
        # worst best-column ratio of A(y) against the segment direction over M_r(x0)
        grid = box_grid(AnisotropicBox.around(x0, p["r"], config.indices), 3)
        direction = np.asarray(p["direction"], dtype=float)
        outcome.extras["projection_contraction"] = projection_contraction(
            coefficients.evaluate(grid), [direction] * len(grid))
        return _finish(outcome, ScanResult("epsilon", rows))

    @registry.experiment("hit", params=HIT_PARAMS, check=check_hit)
    def run_hit(config: ExperimentConfig, coefficients: CoefficientField) -> ExperimentOutcome:
        """Hitting probability of each target box and of their union before leaving M_r"""
        p = config.params
        x0 = point_param(config, "x0")
        enclosing = AnisotropicBox.around(point_param(config, "center"), p["r"], config.indices)
        targets = boxes_param(p["targets"], config.indices)
        rows = []
        for i, box in enumerate(targets):
            report = estimate_hitting(x0, coefficients, config.indices, box, enclosing, config.sampling.n_paths,
                                      sub_seed(config.seed, i), config.sampling, config.threads)
            report.seed = config.seed
            rows.append((float(i), report))
        union = estimate_hitting(x0, coefficients, config.indices, BoxUnion(targets), enclosing,
                                 config.sampling.n_paths, sub_seed(config.seed, len(targets)), config.sampling,
                                 config.threads)
        union.seed = config.seed
        union.notes.append("union of all targets")
        violations = [f"monotonicity violated: union below target {value:g}"
                      for value, report in rows if union.upper < report.lower]
        scan = ScanResult("target", rows + [(float(len(targets)), union)])
        return _finish(ExperimentOutcome(config.experiment), scan, monotone=False, extra=violations)

    @registry.experiment("corner-hit", params=CORNER_HIT_PARAMS, check=check_corner_hit)
    def run_corner_hit(config: ExperimentConfig, coefficients: CoefficientField) -> ExperimentOutcome:
        """Hitting a small box from every corner region of M_r^k"""
        p = config.params
        scan = estimate_corner_hitting(point_param(config, "center"), coefficients, config.indices, p["r"],
                                       p["eps"], p["delta"], p["y"], config.sampling.n_paths, config.seed,
                                       p["points_per_axis"], config.sampling, config.threads)
        return _finish(ExperimentOutcome(config.experiment), scan, monotone=False)
