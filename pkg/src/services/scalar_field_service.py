"""Bounded scalar fields used as generator test functions and harmonic payoffs"""

import logging
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from src.models.errors import ConfigurationError

logger = logging.getLogger(__name__)

# (value, absolute error) of ∫_cut^∞ [f(x + h v) + f(x - h v)] h^(-1-α) dh
TailIntegral = Optional[Tuple[float, float]]


def _power_tail(weight: float, alpha: float, cut: float) -> Tuple[float, float]:
    """weight * ∫_cut^∞ h^(-1-α) dh"""
    return weight * cut ** (-alpha) / alpha, 0.0


class ScalarField:
    """f: R^d -> R evaluated on a point or an (n, d) batch"""

    name = "field"
    # sup |f| over R^d; inf when unbounded
    sup_norm = np.inf

    def _values(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, y) -> np.ndarray:
        pts = np.asarray(y, dtype=float)
        values = self._values(np.atleast_2d(pts))
        return float(values[0]) if pts.ndim == 1 else values

    def curvature(self, x: np.ndarray, v: np.ndarray, step: float) -> float:
        """v^T D^2 f(x) v; second difference unless a subclass knows it"""
        x = np.asarray(x, dtype=float)
        pts = np.vstack([x + step * v, x - step * v, x])
        fp, fm, f0 = self._values(pts)
        return float((fp + fm - 2.0 * f0) / (step * step))

    def paired_tail(self, x: np.ndarray, v: np.ndarray, alpha: float, cut: float) -> TailIntegral:
        """∫_cut^∞ [f(x + h v) + f(x - h v)] h^(-1-α) dh in closed form, or None"""
        return None

    def __repr__(self):
        return f"<ScalarField(name={self.name})>"


class ConstantScalar(ScalarField):
    name = "constant"

    def __init__(self, value: float = 1.0):
        self.value = float(value)
        self.sup_norm = abs(self.value)

    def _values(self, y):
        return np.full(y.shape[0], self.value)

    def curvature(self, x, v, step):
        return 0.0

    def paired_tail(self, x, v, alpha, cut):
        return _power_tail(2.0 * self.value, alpha, cut)


class CosineField(ScalarField):
    """f(y) = amplitude * cos(<ξ, y - origin>)"""

    name = "cosine"

    def __init__(self, xi: Sequence[float], origin: Optional[Sequence[float]] = None, amplitude: float = 1.0):
        self.xi = np.asarray(xi, dtype=float)
        self.origin = np.zeros_like(self.xi) if origin is None else np.asarray(origin, dtype=float)
        self.amplitude = float(amplitude)
        self.sup_norm = abs(self.amplitude)

    def _values(self, y):
        return self.amplitude * np.cos((y - self.origin) @ self.xi)

    def _phase(self, x) -> float:
        return float((np.asarray(x, dtype=float) - self.origin) @ self.xi)

    def curvature(self, x, v, step):
        return -self.amplitude * float(self.xi @ v) ** 2 * np.cos(self._phase(x))

    def paired_tail(self, x, v, alpha, cut):
        # f(x + hv) + f(x - hv) = 2 f(x) cos(ω h), ω = <ξ, v>
        weight = 2.0 * self.amplitude * np.cos(self._phase(x))
        omega = abs(float(self.xi @ v))
        if omega == 0.0:
            return _power_tail(weight, alpha, cut)
        value, error = integrate.quad(lambda h: h ** (-1.0 - alpha), cut, np.inf,
                                      weight="cos", wvar=omega, epsabs=1e-14, limlst=200)
        return weight * value, abs(weight) * error


class AffineField(ScalarField):
    """f(y) = offset + <slope, y>; unbounded, generator value 0"""

    name = "affine"

    def __init__(self, slope: Sequence[float], offset: float = 0.0):
        self.slope = np.asarray(slope, dtype=float)
        self.offset = float(offset)

    def _values(self, y):
        return self.offset + y @ self.slope

    def curvature(self, x, v, step):
        return 0.0

    def paired_tail(self, x, v, alpha, cut):
        return _power_tail(2.0 * self(np.asarray(x, dtype=float)), alpha, cut)


class HalfSpaceIndicator(ScalarField):
    """g(y) = 1{y_axis > level}"""

    name = "half_space"
    sup_norm = 1.0

    def __init__(self, axis: int = 0, level: float = 0.5):
        self.axis = int(axis)
        self.level = float(level)

    def _values(self, y):
        return (y[:, self.axis] > self.level).astype(float)

    def paired_tail(self, x, v, alpha, cut):
        offset = float(x[self.axis]) - self.level
        speed = abs(float(v[self.axis]))
        if speed == 0.0:
            return _power_tail(2.0 * float(offset > 0), alpha, cut)
        # past |offset|/speed exactly one of x ± hv lies above the level
        if cut < abs(offset) / speed:
            return None
        return _power_tail(1.0, alpha, cut)


class ClippedLinear(ScalarField):
    """g(y) = clip(<slope, y>, -bound, bound); linear on a large region, still bounded"""

    name = "clipped_linear"

    def __init__(self, slope: Sequence[float], bound: float = 10.0):
        self.slope = np.asarray(slope, dtype=float)
        self.bound = float(bound)
        self.sup_norm = self.bound

    def _values(self, y):
        return np.clip(y @ self.slope, -self.bound, self.bound)

    def paired_tail(self, x, v, alpha, cut):
        level = float(np.asarray(x, dtype=float) @ self.slope)
        speed = abs(float(self.slope @ v))
        if speed == 0.0:
            return _power_tail(2.0 * float(np.clip(level, -self.bound, self.bound)), alpha, cut)
        # both sides clipped with opposite signs
        if cut < (self.bound + abs(level)) / speed:
            return None
        return 0.0, 0.0


class GaussianBump(ScalarField):
    """g(y) = exp(-|y - center|^2 / (2 width^2))"""

    name = "bump"
    sup_norm = 1.0

    def __init__(self, center: Sequence[float], width: float = 0.5):
        self.center = np.asarray(center, dtype=float)
        self.width = float(width)

    def _values(self, y):
        sq = np.sum((y - self.center) ** 2, axis=1)
        return np.exp(-sq / (2.0 * self.width ** 2))


SCALAR_FIELDS: Dict[str, Callable[..., ScalarField]] = {
    "constant": ConstantScalar,
    "cosine": CosineField,
    "affine": AffineField,
    "half_space": HalfSpaceIndicator,
    "clipped_linear": ClippedLinear,
    "bump": GaussianBump,
}


def build_scalar_field(spec: Dict[str, Any]) -> ScalarField:
    """Instantiate a scalar field from {'kind': name, ...parameters}"""
    params = dict(spec)
    kind = params.pop("kind", None)
    factory = SCALAR_FIELDS.get(kind)
    if factory is None:
        raise ConfigurationError(f"unknown scalar field '{kind}'", [f"known fields: {sorted(SCALAR_FIELDS)}"])
    try:
        return factory(**params)
    except TypeError as e:
        raise ConfigurationError(f"bad parameters for scalar field '{kind}': {e}") from e
