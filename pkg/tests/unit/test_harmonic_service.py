"""Unit tests for harmonic function estimates and Hölder fits"""

import numpy as np
import pytest

from src.models import EstimateReport
from src.models.errors import InsufficientDataError, StableDomainError
from src.services.geometry_service import box_grid
from src.services.harmonic_service import fit_holder_exponent, harmonic_evaluate, oscillation_decay
from src.services.scalar_field_service import ConstantScalar, HalfSpaceIndicator


def exact(value: float, se: float = 1e-6) -> EstimateReport:
    return EstimateReport(estimate=value, std_error=se, ci95=(value - 2 * se, value + 2 * se), n_samples=1, seed=0)


class TestHarmonicEvaluate:
    """Test h(x) = E^x g(X_τ)"""

    def test_constant_payoff(self, rotation, indices, unit_box):
        """Test a constant payoff is reproduced exactly"""
        values = harmonic_evaluate(ConstantScalar(2.0), unit_box, [[0.0, 0.0], [0.3, -0.2]],
                                   rotation, indices, 100, seed=1)
        assert [report.estimate for _, report in values] == [2.0, 2.0]

    def test_symmetric_half_space(self, identity, indices, unit_box):
        """Test P(exit to the right half) is one half at the centre for symmetric drivers"""
        values = harmonic_evaluate(HalfSpaceIndicator(0, 0.0), unit_box, [[0.0, 0.0]], identity, indices,
                                   4000, seed=2)
        _, report = values[0]
        assert abs(report.estimate - 0.5) <= 4 * report.std_error

    def test_monotone_in_start(self, identity, indices, unit_box):
        """Test starting further right makes a right exit more likely"""
        values = harmonic_evaluate(HalfSpaceIndicator(0, 0.0), unit_box, [[-0.6, 0.0], [0.6, 0.0]],
                                   identity, indices, 2000, seed=3)
        (_, left), (_, right) = values
        assert left.estimate < right.estimate

    def test_points_outside(self, identity, indices, unit_box):
        """Test grid points must lie in the domain"""
        with pytest.raises(StableDomainError):
            harmonic_evaluate(ConstantScalar(), unit_box, [[1.5, 0.0]], identity, indices, 10, seed=1)


class TestHolderFit:
    """Test the pairwise regression"""

    def test_linear_profile(self, indices):
        """Test h linear along a line gives β = 1 and c = 1 at r = 1"""
        values = [(np.array([t, 0.0]), exact(0.3 * t)) for t in np.linspace(0.1, 1.0, 10)]
        fit = fit_holder_exponent(values, 1.0, indices)
        assert fit.beta_hat == pytest.approx(1.0)
        assert fit.c_hat == pytest.approx(1.0)
        assert fit.pairs_used == 45
        assert fit.residual == pytest.approx(0.0, abs=1e-9)

    def test_noise_pairs_dropped(self, indices):
        """Test pairs within noise are not informative"""
        values = [(np.array([t, 0.0]), exact(0.5, se=0.1)) for t in np.linspace(0.1, 1.0, 10)]
        with pytest.raises(InsufficientDataError, match="insufficient resolution") as info:
            fit_holder_exponent(values, 1.0, indices)
        assert info.value.count == 0

    def test_too_few_points(self, indices):
        """Test fewer than ten resolved grid values refuse the fit"""
        values = [(np.array([t, 0.0]), exact(0.3 * t)) for t in np.linspace(0.1, 1.0, 9)]
        with pytest.raises(InsufficientDataError) as info:
            fit_holder_exponent(values, 1.0, indices)
        assert info.value.count == 9

    def test_wide_intervals_not_counted(self, indices):
        """Test values whose CI is wide against the spread of h do not count"""
        values = [(np.array([t, 0.0]), exact(0.3 * t, se=1e-6 if i < 6 else 0.05))
                  for i, t in enumerate(np.linspace(0.1, 1.0, 12))]
        with pytest.raises(InsufficientDataError, match="CI width") as info:
            fit_holder_exponent(values, 1.0, indices)
        assert info.value.count == 6
        assert fit_holder_exponent(values, 1.0, indices, ci_fraction=1.0).beta_hat > 0.0

    def test_invalid_fraction(self, indices):
        """Test the CI fraction must lie in (0,1]"""
        values = [(np.array([t, 0.0]), exact(t)) for t in np.linspace(0.1, 1.0, 10)]
        with pytest.raises(StableDomainError):
            fit_holder_exponent(values, 1.0, indices, ci_fraction=0.0)

    def test_affine_in_expectation(self, indices, rng):
        """Test noisy estimates of an affine h still give β close to 1"""
        se = 0.003
        values = [(np.array([t, 0.0]), exact(0.3 * t + rng.normal(0.0, se), se=se))
                  for t in np.linspace(-1.0, 1.0, 15)]
        fit = fit_holder_exponent(values, 1.0, indices)
        assert fit.beta_hat == pytest.approx(1.0, abs=0.1)

    def test_r_scale(self, indices):
        """Test distances are normalised by r^(α_max/α_min)"""
        values = [(np.array([t, 0.0]), exact(t)) for t in np.linspace(0.01, 0.1, 10)]
        fit = fit_holder_exponent(values, 0.25, indices)
        assert fit.r_scale == pytest.approx(0.25 ** 1.5)


class TestOscillation:
    """Test oscillation over nested boxes"""

    def test_levels(self, identity, indices):
        """Test one row per level and a positive outer oscillation"""
        scan = oscillation_decay([0.0, 0.0], identity, indices, HalfSpaceIndicator(0, 0.0), 0.5, 2, 300,
                                 seed=4, points_per_axis=3)
        assert [k for k, _ in scan.rows] == [0.0, 1.0, 2.0]
        assert scan.rows[0][1].estimate > 0.0

    @pytest.mark.parametrize("rho,k_max", [(0.0, 2), (1.0, 2), (0.5, 0)])
    def test_invalid(self, identity, indices, rho, k_max):
        """Test ρ and k_max are validated"""
        with pytest.raises(StableDomainError):
            oscillation_decay([0.0, 0.0], identity, indices, ConstantScalar(), rho, k_max, 10, seed=1)


def test_box_grid_feeds_harmonic(identity, indices, unit_box):
    """Grids from the geometry service are valid harmonic inputs"""
    grid = box_grid(unit_box, 2, fraction=0.5)
    values = harmonic_evaluate(ConstantScalar(), unit_box, grid, identity, indices, 20, seed=5)
    assert len(values) == 4
