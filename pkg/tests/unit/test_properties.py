"""Property-based tests for geometry, kernels and intervals"""

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from src.models import AnisotropicBox, StableIndexSet
from src.services.coefficient_service import RotationField
from src.services.driver_service import levy_constant
from src.services.geometry_service import aniso_metric, best_column_projection, box_inside, contains
from src.services.operator_service import IntervalSlices, jump_intensity
from src.utils.statistics import clopper_pearson

alphas = st.floats(min_value=0.1, max_value=1.9, allow_nan=False)
scales = st.floats(min_value=0.01, max_value=1.0, allow_nan=False)
coords = st.floats(min_value=-5.0, max_value=5.0, allow_nan=False)


@given(st.lists(alphas, min_size=2, max_size=4), scales, st.floats(min_value=0.05, max_value=0.95))
@settings(max_examples=100, deadline=None)
def test_dilated_box_nested(index_list, r, k):
    """M_r^k(x) sits inside M_r(x) and contains x"""
    indices = StableIndexSet.of(index_list)
    center = np.zeros(indices.dim)
    box = AnisotropicBox.around(center, r, indices)
    inner = box.with_dilation(k)
    assert box_inside(inner, box)
    assert contains(inner, center)


@given(st.lists(alphas, min_size=2, max_size=4), scales, scales)
@settings(max_examples=100, deadline=None)
def test_boxes_grow_with_r(index_list, r1, r2):
    """Halfwidths are monotone in the scale on every axis"""
    assume(r1 < r2)
    indices = StableIndexSet.of(index_list)
    small = AnisotropicBox.around(np.zeros(indices.dim), r1, indices)
    large = AnisotropicBox.around(np.zeros(indices.dim), r2, indices)
    assert np.all(small.halfwidths <= large.halfwidths)


@given(st.tuples(coords, coords), st.tuples(coords, coords), st.tuples(coords, coords))
@settings(max_examples=200, deadline=None)
def test_metric_quasi_triangle(x, y, z):
    """The anisotropic distance is symmetric and satisfies a triangle inequality up to a factor d"""
    indices = StableIndexSet.of([1.0, 1.5])
    dxy = aniso_metric(x, y, indices)
    assert dxy == aniso_metric(y, x, indices)
    assert 0.0 <= dxy <= 1.0
    assert dxy <= 2.0 * (aniso_metric(x, z, indices) + aniso_metric(z, y, indices)) + 1e-12


@given(st.floats(min_value=-np.pi, max_value=np.pi), st.tuples(coords, coords))
@settings(max_examples=100, deadline=None)
def test_rotation_projection_contracts(theta, v):
    """Best-column projection never lengthens the vector"""
    assume(np.hypot(*v) > 1e-3)
    A = RotationField(2, theta0=theta, amplitude=0.0).evaluate([0.0, 0.0])
    _, p, ratio = best_column_projection(A, v)
    assert np.linalg.norm(p) <= np.linalg.norm(v) + 1e-9
    assert 0.0 <= ratio <= np.sqrt(0.5) + 1e-9


@given(st.floats(min_value=0.5, max_value=5.0), st.floats(min_value=0.0, max_value=5.0), alphas)
@settings(max_examples=100, deadline=None)
def test_intensity_monotone_in_target(lo, extra, alpha):
    """A smaller target carries less intensity, and the half-line has the closed form"""
    indices = StableIndexSet.of([alpha, 1.0])
    field = RotationField(2, theta0=0.0, amplitude=0.0)
    half_line = jump_intensity([0.0, 0.0], IntervalSlices.slab(2, 0, lo), field, indices)
    bounded = jump_intensity([0.0, 0.0], IntervalSlices.slab(2, 0, lo, lo + extra), field, indices)
    assert bounded <= half_line + 1e-15
    assert np.isclose(half_line, levy_constant(alpha) * lo ** (-alpha) / alpha)


@given(st.integers(min_value=1, max_value=500), st.data())
@settings(max_examples=100, deadline=None)
def test_clopper_pearson_contains_proportion(trials, data):
    """The exact interval lies in [0, 1] and contains the observed proportion"""
    successes = data.draw(st.integers(min_value=0, max_value=trials))
    lo, hi = clopper_pearson(successes, trials)
    assert 0.0 <= lo <= successes / trials <= hi <= 1.0
