from .errors import (
    StableLabError,
    ConfigurationError,
    StableDomainError,
    CoefficientError,
    ConvergenceError,
    CensoringError,
    InsufficientDataError,
)
from .indices import StableIndexSet
from .box import AnisotropicBox
from .trajectory import JumpDecomposition, JumpMark, Trajectory, ExitRecord, SchemeSettings
from .report import EstimateReport, SlopeFit, HolderFit, ScanResult, ResultRow, ExperimentOutcome
from .experiment import (
    EXPERIMENTS,
    CoefficientSpec,
    SamplingConfig,
    QuadratureConfig,
    OutputConfig,
    ExperimentConfig,
)

__all__ = [
    "StableLabError",
    "ConfigurationError",
    "StableDomainError",
    "CoefficientError",
    "ConvergenceError",
    "CensoringError",
    "InsufficientDataError",
    "StableIndexSet",
    "AnisotropicBox",
    "JumpDecomposition",
    "JumpMark",
    "Trajectory",
    "ExitRecord",
    "SchemeSettings",
    "EstimateReport",
    "SlopeFit",
    "HolderFit",
    "ScanResult",
    "ResultRow",
    "ExperimentOutcome",
    "EXPERIMENTS",
    "CoefficientSpec",
    "SamplingConfig",
    "QuadratureConfig",
    "OutputConfig",
    "ExperimentConfig",
]
