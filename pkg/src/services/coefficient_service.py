"""Coefficient fields x -> A(x) and their named presets"""

import logging
from typing import Any, Callable, Dict, Optional, Sequence

import numpy as np

from src.models.box import AnisotropicBox
from src.models.errors import CoefficientError, ConfigurationError
from src.models.experiment import CoefficientSpec

logger = logging.getLogger(__name__)

# |det A| below this counts as degenerate
DET_FLOOR = 1e-12


class CoefficientField:
    """Matrix-valued coefficient A(x); evaluates on single points or (n, d) batches"""

    name = "field"

    def __init__(self, dim: int):
        if dim < 2:
            raise ConfigurationError(f"coefficient dimension must be at least 2, got {dim}")
        self.dim = dim

    def _matrices(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def evaluate(self, x) -> np.ndarray:
        pts = np.asarray(x, dtype=float)
        single = pts.ndim == 1
        batch = np.atleast_2d(pts)
        if batch.shape[1] != self.dim:
            raise CoefficientError(f"point dimension {batch.shape[1]} != field dimension {self.dim}")
        mats = self._matrices(batch)
        return mats[0] if single else mats

    def checked_evaluate(self, x) -> np.ndarray:
        """evaluate() that rejects non-finite or singular matrices"""
        mats = self.evaluate(x)
        batch = mats[None] if mats.ndim == 2 else mats
        finite = np.all(np.isfinite(batch), axis=(1, 2))
        dets = np.where(finite, np.linalg.det(np.where(finite[:, None, None], batch, 0.0)), 0.0)
        bad = ~finite | (np.abs(dets) < DET_FLOOR)
        if np.any(bad):
            pts = np.atleast_2d(np.asarray(x, dtype=float))
            point = pts[int(np.argmax(bad))]
            raise CoefficientError(f"A(x) is degenerate at x={point.tolist()}", point=point)
        return mats

    def inverse_evaluate(self, x) -> np.ndarray:
        return np.linalg.inv(self.checked_evaluate(x))

    def column(self, x, j: int) -> np.ndarray:
        """a_j(x), the j-th column"""
        mats = self.evaluate(x)
        return mats[..., :, j]

    def inverse_transpose_row(self, x, j: int) -> np.ndarray:
        """j-th row of (A^T)^{-1}"""
        inv_t = np.swapaxes(self.inverse_evaluate(x), -1, -2)
        return inv_t[..., j, :]

    def identity_defect(self, x) -> float:
        """max |A A^{-1} - I| over the given points"""
        mats = self.checked_evaluate(x)
        if mats.ndim == 2:
            mats = mats[None]
        prod = mats @ np.linalg.inv(mats)
        return float(np.max(np.abs(prod - np.eye(self.dim))))

    def bound(self, box: AnisotropicBox, rng: np.random.Generator, samples: int = 512) -> float:
        """Λ(D): sampled sup of |A_ij| and |A^{-1}_ij| over the box"""
        pts = _sample_box(box, rng, samples)
        mats = self.checked_evaluate(pts)
        inv = np.linalg.inv(mats)
        return float(max(np.abs(mats).max(), np.abs(inv).max()))

    def modulus(self, box: AnisotropicBox, delta: float, rng: np.random.Generator,
                samples: int = 512) -> float:
        """ϖ(D) at scale delta: sampled sup |A(x) - A(y)| over |x - y| <= delta in the box"""
        x = _sample_box(box, rng, samples)
        direction = rng.standard_normal(x.shape)
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        y = x + delta * rng.random((samples, 1)) * direction
        diff = self.evaluate(x) - self.evaluate(y)
        return float(np.abs(diff).max())

    def __repr__(self):
        return f"<CoefficientField(name={self.name}, dim={self.dim})>"


class ConstantField(CoefficientField):
    """A(x) = M for every x"""

    name = "constant"

    def __init__(self, matrix: Sequence[Sequence[float]]):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ConfigurationError(f"constant coefficient must be a square matrix, got shape {matrix.shape}")
        super().__init__(matrix.shape[0])
        if abs(np.linalg.det(matrix)) < DET_FLOOR:
            raise ConfigurationError("constant coefficient matrix is singular")
        self.matrix = matrix

    def _matrices(self, x: np.ndarray) -> np.ndarray:
        return np.broadcast_to(self.matrix, (x.shape[0], self.dim, self.dim)).copy()


class RotationField(CoefficientField):
    """A(x) = R(θ(x)) diag(scales), θ(x) = θ0 + amplitude * sin(<w, x>).

    The rotation acts in the plane spanned by the two axes in `plane`.
    """

    name = "rotation"

    def __init__(self, dim: int, theta0: float = 0.0, amplitude: float = 0.3,
                 wavevector: Optional[Sequence[float]] = None, plane: Sequence[int] = (0, 1),
                 scales: Optional[Sequence[float]] = None):
        super().__init__(dim)
        self.theta0 = float(theta0)
        self.amplitude = float(amplitude)
        self.wavevector = np.ones(dim) if wavevector is None else np.asarray(wavevector, dtype=float)
        if self.wavevector.shape != (dim,):
            raise ConfigurationError(f"wavevector must have {dim} entries")
        i, j = (int(p) for p in plane)
        if i == j or not (0 <= i < dim and 0 <= j < dim):
            raise ConfigurationError(f"rotation plane {plane} is invalid for d={dim}")
        self.plane = (i, j)
        self.scales = np.ones(dim) if scales is None else np.asarray(scales, dtype=float)
        if self.scales.shape != (dim,) or np.any(self.scales == 0):
            raise ConfigurationError("scales must be a non-zero vector of length d")

    def angle(self, x: np.ndarray) -> np.ndarray:
        return self.theta0 + self.amplitude * np.sin(x @ self.wavevector)

    def _matrices(self, x: np.ndarray) -> np.ndarray:
        theta = self.angle(x)
        c, s = np.cos(theta), np.sin(theta)
        i, j = self.plane
        mats = np.broadcast_to(np.eye(self.dim), (x.shape[0], self.dim, self.dim)).copy()
        mats[:, i, i] = c
        mats[:, i, j] = -s
        mats[:, j, i] = s
        mats[:, j, j] = c
        return mats * self.scales[None, None, :]


def _sample_box(box: AnisotropicBox, rng: np.random.Generator, samples: int) -> np.ndarray:
    return box.center_array + box.halfwidths * rng.uniform(-1.0, 1.0, (samples, box.dim))


def _identity(dim: int, **_: Any) -> CoefficientField:
    field = ConstantField(np.eye(dim))
    field.name = "identity"
    return field


def _constant(dim: int, matrix=None, **_: Any) -> CoefficientField:
    if matrix is None:
        raise ConfigurationError("preset 'constant' needs a 'matrix' parameter")
    field = ConstantField(matrix)
    if field.dim != dim:
        raise ConfigurationError(f"matrix is {field.dim}x{field.dim}, indices need d={dim}")
    return field


def _diagonal(dim: int, scales=None, **_: Any) -> CoefficientField:
    if scales is None or len(scales) != dim:
        raise ConfigurationError(f"preset 'diagonal' needs 'scales' with {dim} entries")
    field = ConstantField(np.diag(np.asarray(scales, dtype=float)))
    field.name = "diagonal"
    return field


def _rotation(dim: int, theta0: float = 0.0, amplitude: float = 0.3, wavevector=None,
              plane=(0, 1), **_: Any) -> CoefficientField:
    return RotationField(dim, theta0, amplitude, wavevector, plane)


def _scaled_rotation(dim: int, theta0: float = 0.0, amplitude: float = 0.3, wavevector=None,
                     plane=(0, 1), scales=None, **_: Any) -> CoefficientField:
    if scales is None:
        raise ConfigurationError("preset 'scaled_rotation' needs 'scales'")
    field = RotationField(dim, theta0, amplitude, wavevector, plane, scales)
    field.name = "scaled_rotation"
    return field


PRESETS: Dict[str, Callable[..., CoefficientField]] = {
    "identity": _identity,
    "constant": _constant,
    "diagonal": _diagonal,
    "rotation": _rotation,
    "scaled_rotation": _scaled_rotation,
}

PRESET_PARAMS: Dict[str, tuple] = {
    "identity": (),
    "constant": ("matrix",),
    "diagonal": ("scales",),
    "rotation": ("theta0", "amplitude", "wavevector", "plane"),
    "scaled_rotation": ("theta0", "amplitude", "wavevector", "plane", "scales"),
}


def build_coefficient_field(spec: CoefficientSpec, dim: int) -> CoefficientField:
    """Instantiate a named preset"""
    factory = PRESETS.get(spec.preset)
    if factory is None:
        raise ConfigurationError(
            f"unknown coefficient preset '{spec.preset}'", [f"known presets: {sorted(PRESETS)}"]
        )
    field = factory(dim, **spec.params)
    logger.debug(f"Built coefficient field {field!r} from preset {spec.preset}")
    return field
