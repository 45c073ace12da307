"""Anisotropic boxes, the anisotropic metric and projection utilities"""

import logging
from typing import Optional, Sequence, Tuple

import numpy as np

from src.models.box import AnisotropicBox
from src.models.errors import StableDomainError
from src.models.indices import StableIndexSet

logger = logging.getLogger(__name__)


def box_halfwidths(box: AnisotropicBox) -> np.ndarray:
    return box.halfwidths


def _as_points(x, dim: int) -> np.ndarray:
    pts = np.asarray(x, dtype=float)
    if pts.shape[-1] != dim:
        raise StableDomainError(f"point dimension {pts.shape[-1]} does not match box dimension {dim}")
    return pts


def contains(box: AnisotropicBox, x) -> np.ndarray:
    """Open-box membership; works on a single point or an (n, d) array"""
    pts = _as_points(x, box.dim)
    inside = np.all(np.abs(pts - box.center_array) < box.halfwidths, axis=-1)
    return bool(inside) if inside.ndim == 0 else inside


def aniso_metric(x, y, indices: StableIndexSet) -> np.ndarray:
    """sup_k { |x_k - y_k|^(α_k/α_max) 1{gap <= 1} + 1{gap > 1} }"""
    gx = _as_points(x, indices.dim)
    gy = _as_points(y, indices.dim)
    gap = np.abs(gx - gy)
    expo = indices.as_array() / indices.alpha_max
    terms = np.where(gap <= 1.0, gap ** expo, 1.0)
    value = np.max(terms, axis=-1)
    return float(value) if np.ndim(value) == 0 else value


def min_boundary_distance(box: AnisotropicBox, x) -> np.ndarray:
    """Euclidean distance from x to the complement of the box (0 outside)"""
    pts = _as_points(x, box.dim)
    slack = box.halfwidths - np.abs(pts - box.center_array)
    dist = np.clip(np.min(slack, axis=-1), 0.0, None)
    return float(dist) if np.ndim(dist) == 0 else dist


def box_grid(box: AnisotropicBox, points_per_axis: int, fraction: float = 0.8) -> np.ndarray:
    """Tensor grid inside the box, spaced per axis proportionally to its halfwidth"""
    if points_per_axis < 1:
        raise StableDomainError("points_per_axis must be at least 1")
    if not (0.0 < fraction < 1.0):
        raise StableDomainError(f"fraction must lie in (0,1), got {fraction}")
    axes = [
        np.linspace(c - fraction * hw, c + fraction * hw, points_per_axis) if points_per_axis > 1
        else np.array([c])
        for c, hw in zip(box.center, box.halfwidths)
    ]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


def project_onto(v, u) -> np.ndarray:
    """Orthogonal projection of v onto the line spanned by u"""
    v = np.asarray(v, dtype=float)
    u = np.asarray(u, dtype=float)
    uu = float(u @ u)
    if uu == 0.0:
        raise StableDomainError("cannot project onto the zero vector")
    return (float(v @ u) / uu) * u


def best_column_projection(A, v) -> Tuple[int, np.ndarray, float]:
    """Column direction of A that best approximates v.

    Returns (k, p_k, |v - p_k| / |v|) with k minimal among ties.
    """
    A = np.asarray(A, dtype=float)
    v = np.asarray(v, dtype=float)
    norm_v = float(np.linalg.norm(v))
    if norm_v == 0.0:
        raise StableDomainError("v must be non-zero")
    if abs(np.linalg.det(A)) < 1e-14 * max(1.0, float(np.abs(A).max()) ** A.shape[0]):
        raise StableDomainError("coefficient matrix is singular")

    best_k, best_p, best_ratio = 0, None, np.inf
    for k in range(A.shape[1]):
        p = project_onto(v, A[:, k])
        ratio = float(np.linalg.norm(v - p)) / norm_v
        # strict comparison keeps the smallest index on ties
        if ratio < best_ratio - 1e-15:
            best_k, best_p, best_ratio = k, p, ratio
    return best_k, best_p, best_ratio


def projection_contraction(matrices: Sequence[np.ndarray], vectors: Sequence[np.ndarray]) -> float:
    """Worst best-column ratio ρ* over an ensemble of (A, v) pairs"""
    worst = 0.0
    for A, v in zip(matrices, vectors):
        _, _, ratio = best_column_projection(A, v)
        worst = max(worst, ratio)
    return worst


def sub_box(box: AnisotropicBox, k: float, center: Optional[Sequence[float]] = None) -> AnisotropicBox:
    """Box with the same scale r and a new dilation, optionally recentred"""
    target = box.center if center is None else tuple(center)
    return AnisotropicBox(target, box.r, k, box.indices)


def box_inside(inner: AnisotropicBox, outer: AnisotropicBox) -> bool:
    """Closure of inner contained in the closure of outer"""
    lo_in = inner.center_array - inner.halfwidths
    hi_in = inner.center_array + inner.halfwidths
    lo_out = outer.center_array - outer.halfwidths
    hi_out = outer.center_array + outer.halfwidths
    return bool(np.all(lo_in >= lo_out - 1e-15) and np.all(hi_in <= hi_out + 1e-15))


class BoxUnion:
    """Set predicate for a finite union of anisotropic boxes"""

    def __init__(self, boxes: Sequence[AnisotropicBox]):
        if not boxes:
            raise StableDomainError("a box union needs at least one box")
        self.boxes = tuple(boxes)

    def __call__(self, x) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(x, dtype=float))
        hit = np.zeros(pts.shape[0], dtype=bool)
        for box in self.boxes:
            hit |= contains(box, pts)
        return hit

    @property
    def volume_upper_bound(self) -> float:
        return float(sum(box.volume for box in self.boxes))

    def __repr__(self):
        return f"<BoxUnion(boxes={len(self.boxes)})>"
