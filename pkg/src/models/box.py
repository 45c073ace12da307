from dataclasses import dataclass
from typing import Sequence

import numpy as np

from src.models.errors import StableDomainError
from src.models.indices import StableIndexSet


@dataclass(frozen=True)
class AnisotropicBox:
    """Open rectangle M_r^k(x) with per-axis halfwidth k * r^(α_max/α_i)"""

    center: tuple
    r: float
    k: float
    indices: StableIndexSet

    def __post_init__(self):
        center = tuple(float(c) for c in np.ravel(self.center))
        if len(center) != self.indices.dim:
            raise StableDomainError(
                f"center has dimension {len(center)}, indices have {self.indices.dim}"
            )
        if not (0.0 < self.r <= 1.0):
            raise StableDomainError(f"scale r={self.r} must lie in (0,1]")
        if self.k <= 0.0:
            raise StableDomainError(f"dilation k={self.k} must be positive")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "k", float(self.k))

    @classmethod
    def around(cls, center: Sequence[float], r: float, indices: StableIndexSet,
               k: float = 1.0) -> "AnisotropicBox":
        return cls(tuple(center), r, k, indices)

    @property
    def dim(self) -> int:
        return self.indices.dim

    @property
    def center_array(self) -> np.ndarray:
        return np.asarray(self.center, dtype=float)

    @property
    def halfwidths(self) -> np.ndarray:
        return self.k * self.r ** self.indices.scale_exponents()

    @property
    def volume(self) -> float:
        return float(np.prod(2.0 * self.halfwidths))

    def with_dilation(self, k: float) -> "AnisotropicBox":
        return AnisotropicBox(self.center, self.r, k, self.indices)

    def with_scale(self, r: float) -> "AnisotropicBox":
        return AnisotropicBox(self.center, r, self.k, self.indices)

    def moved_to(self, center: Sequence[float]) -> "AnisotropicBox":
        return AnisotropicBox(tuple(center), self.r, self.k, self.indices)

    def __repr__(self):
        return f"<AnisotropicBox(center={self.center}, r={self.r}, k={self.k})>"
