"""Helpers shared by the experiment handlers: parameter conversion and report rows"""

from typing import Any, Dict, List, Sequence

import numpy as np

from src.models.box import AnisotropicBox
from src.models.experiment import ExperimentConfig
from src.models.indices import StableIndexSet
from src.models.report import EstimateReport, ExperimentOutcome, ResultRow
from src.services.estimator_service import PolylineCurve
from src.utils.statistics import Z95


def origin(indices: StableIndexSet) -> List[float]:
    return [0.0] * indices.dim


def point_param(config: ExperimentConfig, name: str) -> np.ndarray:
    """A point parameter, the origin when it was left out"""
    value = config.params.get(name)
    return np.asarray(origin(config.indices) if value is None else value, dtype=float)


def boxes_param(value: Sequence[Dict[str, Any]], indices: StableIndexSet) -> List[AnisotropicBox]:
    return [AnisotropicBox.around(box["center"], box["r"], indices, k=box.get("k", 1.0)) for box in value]


def polyline_param(value: Dict[str, Any]) -> PolylineCurve:
    return PolylineCurve(value["times"], value["points"])


def point_report(value: float, seed: int, wall_time: float = 0.0) -> EstimateReport:
    """Deterministic number reported as an estimate with zero error"""
    return EstimateReport(estimate=float(value), std_error=0.0, ci95=(float(value), float(value)),
                          n_samples=0, seed=seed, wall_time=wall_time)


def moment_report(estimate: float, std_error: float, n: int, seed: int, wall_time: float = 0.0) -> EstimateReport:
    return EstimateReport(estimate=float(estimate), std_error=float(std_error),
                          ci95=(estimate - Z95 * std_error, estimate + Z95 * std_error),
                          n_samples=int(n), seed=seed, wall_time=wall_time)


def add_report(outcome: ExperimentOutcome, param_name: str, param_value: float, report: EstimateReport) -> None:
    outcome.rows.append(ResultRow(param_name, float(param_value), report))
