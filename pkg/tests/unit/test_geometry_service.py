"""Unit tests for anisotropic boxes and projection utilities"""

import numpy as np
import pytest

from src.models import AnisotropicBox, StableIndexSet
from src.models.errors import StableDomainError
from src.services.geometry_service import (
    BoxUnion,
    aniso_metric,
    best_column_projection,
    box_grid,
    box_halfwidths,
    box_inside,
    contains,
    min_boundary_distance,
    project_onto,
    projection_contraction,
    sub_box,
)


class TestAnisotropicBox:
    """Test box construction and halfwidths"""

    def test_halfwidths(self, indices):
        """Test halfwidth k r^(α_max/α_i) per axis"""
        box = AnisotropicBox.around([0.0, 0.0], 0.25, indices, k=2.0)
        assert np.allclose(box_halfwidths(box), [2.0 * 0.25 ** 1.5, 2.0 * 0.25])
        assert box.volume == pytest.approx(4 * box.halfwidths.prod())

    def test_unit_scale_is_cube(self, indices_3d):
        """Test r = 1 gives the cube of halfwidth k whatever the indices"""
        box = AnisotropicBox.around([1.0, 2.0, 3.0], 1.0, indices_3d, k=0.5)
        assert np.allclose(box.halfwidths, 0.5)

    @pytest.mark.parametrize("r,k", [(0.0, 1.0), (1.5, 1.0), (0.5, 0.0), (0.5, -1.0)])
    def test_invalid_parameters(self, indices, r, k):
        """Test r outside (0,1] and k ≤ 0 are rejected"""
        with pytest.raises(StableDomainError):
            AnisotropicBox.around([0.0, 0.0], r, indices, k=k)

    def test_dimension_mismatch(self, indices):
        """Test centre and indices must agree in dimension"""
        with pytest.raises(StableDomainError):
            AnisotropicBox.around([0.0, 0.0, 0.0], 0.5, indices)

    def test_derived_boxes(self, unit_box):
        """Test dilation, rescaling and recentring"""
        assert unit_box.with_dilation(0.5).halfwidths == pytest.approx([0.5, 0.5])
        assert unit_box.with_scale(0.25).r == 0.25
        assert unit_box.moved_to([0.1, 0.2]).center == (0.1, 0.2)
        assert sub_box(unit_box, 0.3).k == 0.3


class TestContainment:
    """Test membership, boundary distance and inclusion"""

    def test_open_box(self, unit_box):
        """Test the boundary is not part of the box"""
        assert contains(unit_box, [0.0, 0.0])
        assert not contains(unit_box, [1.0, 0.0])
        assert contains(unit_box, np.array([[0.5, 0.5], [1.5, 0.0]])).tolist() == [True, False]

    def test_boundary_distance(self, unit_box):
        """Test distance to the complement"""
        assert min_boundary_distance(unit_box, [0.25, -0.5]) == pytest.approx(0.5)
        assert min_boundary_distance(unit_box, [3.0, 0.0]) == 0.0

    def test_box_inside(self, unit_box):
        """Test closed inclusion of boxes"""
        assert box_inside(unit_box.with_dilation(0.5), unit_box)
        assert box_inside(unit_box, unit_box)
        assert not box_inside(unit_box.moved_to([0.9, 0.0]).with_dilation(0.5), unit_box)

    def test_grid_inside(self, indices):
        """Test grid points lie inside and follow the halfwidth ratio"""
        box = AnisotropicBox.around([0.1, -0.1], 0.5, indices)
        grid = box_grid(box, 4, fraction=0.9)
        assert grid.shape == (16, 2)
        assert np.all(contains(box, grid))
        spread = grid.max(axis=0) - grid.min(axis=0)
        assert spread / spread[1] == pytest.approx(box.halfwidths / box.halfwidths[1])

    def test_box_union(self, unit_box):
        """Test the union predicate and its volume bound"""
        left = unit_box.moved_to([-0.5, 0.0]).with_dilation(0.25)
        right = unit_box.moved_to([0.5, 0.0]).with_dilation(0.25)
        union = BoxUnion([left, right])
        assert union([[-0.5, 0.0], [0.5, 0.1], [0.0, 0.0]]).tolist() == [True, True, False]
        assert union.volume_upper_bound == pytest.approx(left.volume + right.volume)
        with pytest.raises(StableDomainError):
            BoxUnion([])


class TestMetric:
    """Test the anisotropic quasi-metric"""

    def test_axis_exponents(self, indices):
        """Test |x_k - y_k|^(α_k/α_max) with the cap at gap 1"""
        assert aniso_metric([0.0, 0.0], [0.25, 0.0], indices) == pytest.approx(0.25 ** (1.0 / 1.5))
        assert aniso_metric([0.0, 0.0], [0.0, 0.25], indices) == pytest.approx(0.25)
        assert aniso_metric([0.0, 0.0], [3.0, 0.0], indices) == 1.0

    def test_box_is_metric_ball(self, indices, rng):
        """Test points of M_r(x) have distance below r from x"""
        box = AnisotropicBox.around([0.0, 0.0], 0.3, indices)
        pts = box_grid(box, 6, fraction=0.99)
        assert np.all(aniso_metric(pts, np.zeros(2), indices) < 0.3)


class TestProjection:
    """Test best-column projections"""

    def test_project_onto(self):
        """Test orthogonal projection on a line"""
        assert project_onto([1.0, 1.0], [2.0, 0.0]) == pytest.approx([1.0, 0.0])
        with pytest.raises(StableDomainError):
            project_onto([1.0, 0.0], [0.0, 0.0])

    def test_exact_column(self):
        """Test a column direction is recovered with zero residual"""
        A = np.array([[1.0, 1.0], [0.0, 1.0]])
        k, p, ratio = best_column_projection(A, [2.0, 2.0])
        assert k == 1
        assert p == pytest.approx([2.0, 2.0])
        assert ratio == pytest.approx(0.0, abs=1e-12)

    def test_ties_choose_smallest_index(self):
        """Test ties are broken toward the first column"""
        k, _, ratio = best_column_projection(np.eye(2), [1.0, 1.0])
        assert k == 0
        assert ratio == pytest.approx(np.sqrt(0.5))

    def test_singular_matrix(self):
        """Test singular coefficients are rejected"""
        with pytest.raises(StableDomainError):
            best_column_projection(np.ones((2, 2)), [1.0, 0.0])

    def test_contraction_below_one(self, rng):
        """Test ρ* < 1 over random matrices with condition number at most 10"""
        mats = [np.linalg.qr(rng.standard_normal((3, 3)))[0] @ np.diag(rng.uniform(1.0, 10.0, 3)) for _ in range(50)]
        vecs = [rng.standard_normal(3) for _ in range(50)]
        assert all(np.linalg.cond(A) <= 10.0 + 1e-9 for A in mats)
        assert projection_contraction(mats, vecs) < 1.0
