from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from src.models.errors import StableDomainError
from src.models.indices import StableIndexSet

EXPERIMENTS = (
    "exit-time",
    "jump-exit",
    "targeted-jump",
    "tube",
    "segment-tube",
    "hit",
    "corner-hit",
    "harmonic",
    "holder",
    "oscillation",
    "landing-profile",
    "levy-system",
    "dynkin",
    "driver-selftest",
)


@dataclass
class CoefficientSpec:
    preset: str = "identity"
    params: Dict[str, Any] = field(default_factory=dict)


@dataclass
class SamplingConfig:
    n_paths: int = 10_000
    horizon: Optional[float] = None
    grid: Optional[float] = None
    jump_threshold: Optional[float] = None


@dataclass(frozen=True)
class QuadratureConfig:
    """Settings for the generator quadrature"""

    inner_cut: float = 1e-4
    outer_cut: float = 1e4
    tolerance: float = 1e-9
    max_refinements: int = 200
    # neglected far tail, relative to sup|f|
    tail_tolerance: float = 1e-8

    def __post_init__(self):
        if not (0.0 < self.inner_cut < 1.0 < self.outer_cut):
            raise StableDomainError(
                f"need 0 < inner_cut < 1 < outer_cut, got {self.inner_cut}, {self.outer_cut}"
            )
        if self.tolerance <= 0:
            raise StableDomainError(f"tolerance must be positive, got {self.tolerance}")
        if not (0.0 < self.tail_tolerance < 1.0):
            raise StableDomainError(f"tail_tolerance must lie in (0,1), got {self.tail_tolerance}")
        if self.max_refinements < 1:
            raise StableDomainError("max_refinements must be at least 1")


@dataclass
class OutputConfig:
    directory: Optional[str] = None
    name: Optional[str] = None
    plot: bool = False


@dataclass
class ExperimentConfig:
    """Fully resolved configuration of one experiment run"""

    experiment: str
    indices: StableIndexSet
    coefficients: CoefficientSpec
    params: Dict[str, Any]
    sampling: SamplingConfig
    seed: int
    output: OutputConfig = field(default_factory=OutputConfig)
    threads: int = 1
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)

    @property
    def dim(self) -> int:
        return self.indices.dim

    def to_dict(self) -> Dict[str, Any]:
        return {
            "experiment": self.experiment,
            "indices": list(self.indices.alphas),
            "coefficients": {"preset": self.coefficients.preset, **self.coefficients.params},
            "params": self.params,
            "sampling": {
                "n_paths": self.sampling.n_paths,
                "horizon": self.sampling.horizon,
                "grid": self.sampling.grid,
                "jump_threshold": self.sampling.jump_threshold,
            },
            "quadrature": {
                "inner_cut": self.quadrature.inner_cut,
                "outer_cut": self.quadrature.outer_cut,
                "tolerance": self.quadrature.tolerance,
                "max_refinements": self.quadrature.max_refinements,
                "tail_tolerance": self.quadrature.tail_tolerance,
            },
            "seed": self.seed,
            "output": {
                "directory": self.output.directory,
                "name": self.output.name,
                "plot": self.output.plot,
            },
        }
