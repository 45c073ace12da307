from dataclasses import dataclass, field
from typing import Sequence, Tuple

import numpy as np

from src.models.errors import StableDomainError

# Indices closer than this to 0 or 2 make the CMS transform degenerate
INDEX_MARGIN = 1e-3


@dataclass(frozen=True)
class StableIndexSet:
    """Stability indices (α_1, ..., α_d) of the driving processes"""

    alphas: Tuple[float, ...]
    alpha_min: float = field(init=False)
    alpha_max: float = field(init=False)

    def __post_init__(self):
        alphas = tuple(float(a) for a in self.alphas)
        if len(alphas) < 2:
            raise StableDomainError(f"need at least two drivers, got d={len(alphas)}")
        for i, a in enumerate(alphas):
            if not (INDEX_MARGIN <= a <= 2.0 - INDEX_MARGIN):
                raise StableDomainError(
                    f"alpha[{i}]={a} must lie in the open interval (0,2) "
                    f"at least {INDEX_MARGIN} away from the endpoints"
                )
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "alpha_min", min(alphas))
        object.__setattr__(self, "alpha_max", max(alphas))

    @classmethod
    def of(cls, alphas: Sequence[float]) -> "StableIndexSet":
        return cls(tuple(alphas))

    @property
    def dim(self) -> int:
        return len(self.alphas)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.alphas, dtype=float)

    def scale_exponents(self) -> np.ndarray:
        """Per-axis exponents α_max/α_i of the anisotropic boxes"""
        return self.alpha_max / self.as_array()

    def holder_scale(self, r: float) -> float:
        """The normalisation r^{α_max/α_min}"""
        return float(r ** (self.alpha_max / self.alpha_min))

    def __repr__(self):
        return f"<StableIndexSet(alphas={self.alphas})>"
