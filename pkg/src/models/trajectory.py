from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from src.models.errors import StableDomainError


@dataclass(frozen=True)
class JumpDecomposition:
    """Big/small split of one driver on a grid"""

    threshold: float
    big_jumps: List[Tuple[float, float]]
    small_increments: np.ndarray
    grid: float
    horizon: float

    @property
    def big_jump_count(self) -> int:
        return len(self.big_jumps)

    def big_total(self) -> float:
        return float(sum(size for _, size in self.big_jumps))

    def small_total(self) -> float:
        return float(np.sum(self.small_increments))

    def quadratic_variation(self) -> float:
        """Realised quadratic variation of the small component"""
        return float(np.sum(self.small_increments ** 2))


@dataclass(frozen=True)
class JumpMark:
    time: float
    axis: int
    size: float
    pre_state: np.ndarray
    post_state: np.ndarray


@dataclass
class Trajectory:
    """Jump-adapted skeleton of one simulated path"""

    times: List[float] = field(default_factory=list)
    states: List[np.ndarray] = field(default_factory=list)
    jump_marks: List[JumpMark] = field(default_factory=list)

    def append(self, t: float, x: np.ndarray) -> None:
        if self.times and t <= self.times[-1]:
            raise StableDomainError(f"time {t} does not follow last recorded time {self.times[-1]}")
        # At a jump time the stored state is X_t; the left limit lives in the jump mark
        self.times.append(float(t))
        self.states.append(np.array(x, dtype=float))

    @property
    def initial_state(self) -> np.ndarray:
        return self.states[0]

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def as_arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.times), np.vstack(self.states)

    def __len__(self):
        return len(self.times)

    def __repr__(self):
        return f"<Trajectory(points={len(self.times)}, jumps={len(self.jump_marks)})>"


@dataclass(frozen=True)
class ExitRecord:
    """First exit (and optionally first hit) of one path"""

    exit_time: float
    exit_state: np.ndarray
    pre_exit_state: np.ndarray
    hit_time: Optional[float] = None
    hit_state: Optional[np.ndarray] = None
    censored: bool = False
    elapsed: float = 0.0

    @property
    def hit_before_exit(self) -> bool:
        return self.hit_time is not None


@dataclass(frozen=True)
class SchemeSettings:
    """Resolved time discretisation of the jump-adapted scheme"""

    horizon: float
    grid: float
    threshold: float

    def __post_init__(self):
        if self.horizon <= 0:
            raise StableDomainError(f"horizon must be positive, got {self.horizon}")
        if not (0.0 < self.grid <= self.horizon):
            raise StableDomainError(f"grid step {self.grid} must lie in (0, horizon={self.horizon}]")
        if self.threshold <= 0:
            raise StableDomainError(f"jump threshold must be positive, got {self.threshold}")

    def with_horizon(self, horizon: float) -> "SchemeSettings":
        return SchemeSettings(horizon=horizon, grid=min(self.grid, horizon), threshold=self.threshold)
