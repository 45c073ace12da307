"""One-dimensional symmetric stable drivers.

Normalisation: E exp(i ξ Y_t) = exp(-t |ξ|^γ), Lévy density c_γ |h|^(-1-γ).
"""

import logging
import math
from typing import Dict, Optional, Tuple, Union

import numpy as np
from scipy import integrate, special

from src.lab.config import config
from src.models.errors import ConfigurationError, StableDomainError
from src.models.trajectory import JumpDecomposition

logger = logging.getLogger(__name__)

Size = Optional[Union[int, Tuple[int, ...]]]


def _check_index(gamma: float) -> float:
    gamma = float(gamma)
    if not (0.0 < gamma < 2.0):
        raise StableDomainError(f"stability index {gamma} must lie in the open interval (0,2)")
    return gamma


def levy_constant(gamma: float) -> float:
    """Constant c_γ of the Lévy density c_γ |h|^(-1-γ).

    Equals γ 2^(γ-1) Γ((1+γ)/2) / (√π Γ(1-γ/2)), i.e. the formula
    2^γ Γ((1+γ)/2) / |Γ(-γ/2)| divided by √π; only this version makes the
    symbol identity ∫(1 - cos ξh) ν(dh) = |ξ|^γ hold.
    """
    gamma = _check_index(gamma)
    return float(
        gamma * 2.0 ** (gamma - 1.0) * special.gamma((1.0 + gamma) / 2.0)
        / (math.sqrt(math.pi) * special.gamma(1.0 - gamma / 2.0))
    )


def unnormalised_levy_constant(gamma: float) -> float:
    """2^γ Γ((1+γ)/2) / |Γ(-γ/2)|, off from levy_constant by a factor √π"""
    gamma = _check_index(gamma)
    return float(2.0 ** gamma * special.gamma((1.0 + gamma) / 2.0) / abs(special.gamma(-gamma / 2.0)))


def big_jump_rate(gamma: float, threshold: float) -> float:
    """Intensity of jumps with |h| > threshold: 2 c_γ β^(-γ) / γ"""
    gamma = _check_index(gamma)
    if threshold <= 0:
        raise StableDomainError(f"jump threshold must be positive, got {threshold}")
    return 2.0 * levy_constant(gamma) * threshold ** (-gamma) / gamma


def small_jump_variance_rate(gamma: float, threshold: float) -> float:
    """∫_{|h|<=β} h^2 ν(dh) = 2 c_γ β^(2-γ) / (2-γ)"""
    gamma = _check_index(gamma)
    if threshold <= 0:
        raise StableDomainError(f"jump threshold must be positive, got {threshold}")
    return 2.0 * levy_constant(gamma) * threshold ** (2.0 - gamma) / (2.0 - gamma)


def sample_stable_increment(gamma: float, dt: float, rng: np.random.Generator,
                            size: Size = None) -> Union[float, np.ndarray]:
    """Exact draw of Y_dt by the Chambers-Mallows-Stuck transform"""
    gamma = _check_index(gamma)
    if dt <= 0:
        raise StableDomainError(f"time increment must be positive, got {dt}")
    v = rng.uniform(-math.pi / 2.0, math.pi / 2.0, size)
    w = rng.standard_exponential(size)
    if gamma == 1.0:
        y = np.tan(v)
    else:
        y = (np.sin(gamma * v) / np.cos(v) ** (1.0 / gamma)
             * (np.cos((1.0 - gamma) * v) / w) ** ((1.0 - gamma) / gamma))
    y = dt ** (1.0 / gamma) * y
    return float(y) if size is None else y


def sample_big_jump_sizes(gamma: float, threshold: float, rng: np.random.Generator,
                          size: Size = None) -> Union[float, np.ndarray]:
    """Jump sizes with density ∝ |h|^(-1-γ) on |h| > threshold, symmetric sign"""
    gamma = _check_index(gamma)
    u = 1.0 - rng.random(size)
    sign = np.where(rng.random(size) < 0.5, -1.0, 1.0)
    h = sign * threshold * u ** (-1.0 / gamma)
    return float(h) if size is None else h


def _grid_steps(horizon: float, grid: float) -> np.ndarray:
    n_steps = int(math.ceil(horizon / grid - 1e-12))
    steps = np.full(n_steps, grid)
    steps[-1] = horizon - grid * (n_steps - 1)
    return steps


def decompose_jumps(gamma: float, threshold: float, horizon: float, grid: float,
                    rng: np.random.Generator) -> JumpDecomposition:
    """Split one driver on [0, horizon] into big jumps and per-step small increments.

    Big jumps form a compound Poisson process. The small component is drawn
    per grid step as a centred Gaussian with the exact small-jump variance.
    """
    gamma = _check_index(gamma)
    if not (0.0 < threshold < config.MAX_JUMP_THRESHOLD):
        raise ConfigurationError(
            f"jump threshold {threshold} must lie in (0, {config.MAX_JUMP_THRESHOLD})"
        )
    if horizon <= 0:
        raise ConfigurationError(f"horizon must be positive, got {horizon}")
    if not (0.0 < grid <= horizon):
        raise ConfigurationError(f"grid step {grid} must lie in (0, horizon={horizon}]")

    rate = big_jump_rate(gamma, threshold)
    count = int(rng.poisson(rate * horizon))
    times = np.sort(rng.uniform(0.0, horizon, count))
    sizes = sample_big_jump_sizes(gamma, threshold, rng, count)

    steps = _grid_steps(horizon, grid)
    sigma = math.sqrt(small_jump_variance_rate(gamma, threshold))
    small = sigma * np.sqrt(steps) * rng.standard_normal(steps.size)

    logger.debug(f"Decomposed driver gamma={gamma}: {count} big jumps, {steps.size} steps")
    return JumpDecomposition(
        threshold=float(threshold),
        big_jumps=[(float(t), float(h)) for t, h in zip(times, sizes)],
        small_increments=small,
        grid=float(grid),
        horizon=float(horizon),
    )


def symbol_quadrature(gamma: float, xi: float) -> float:
    """Adaptive quadrature of ∫_R (1 - cos ξh) c_γ |h|^(-1-γ) dh.

    Evaluated directly in h (no rescaling by ξ): the part on (0,1] uses an
    algebraic weight for h^(1-γ), the tail splits into 1/γ minus a Fourier
    integral handled by QUADPACK's oscillatory rule.
    """
    gamma = _check_index(gamma)
    c = levy_constant(gamma)
    if xi == 0:
        return 0.0
    xi = abs(float(xi))

    def smooth_part(h):
        # (1 - cos ξh)/h^2 written without cancellation
        if h == 0.0:
            return xi * xi / 2.0
        s = math.sin(xi * h / 2.0)
        return 2.0 * s * s / (h * h)

    near, _ = integrate.quad(smooth_part, 0.0, 1.0, weight="alg", wvar=(1.0 - gamma, 0.0),
                             epsabs=0.0, epsrel=1e-12, limit=200)
    tail_cos, _ = integrate.quad(lambda h: h ** (-1.0 - gamma), 1.0, np.inf,
                                 weight="cos", wvar=xi, epsabs=1e-14, limlst=200)
    return 2.0 * c * (near + 1.0 / gamma - tail_cos)


def characteristic_function_check(gamma: float, xi: float, n: int,
                                  rng: np.random.Generator, dt: float = 1.0) -> Dict[str, float]:
    """Empirical E cos(ξ Y_dt) against exp(-dt |ξ|^γ)"""
    samples = sample_stable_increment(gamma, dt, rng, size=n)
    values = np.cos(xi * samples)
    mean = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(n))
    exact = math.exp(-dt * abs(xi) ** gamma)
    z = (mean - exact) / se if se > 0 else 0.0
    return {"gamma": gamma, "xi": xi, "estimate": mean, "std_error": se, "exact": exact, "z": z}
