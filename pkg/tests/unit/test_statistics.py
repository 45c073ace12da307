"""Unit tests for confidence intervals, regressions and random streams"""

import numpy as np
import pytest

from src.models.errors import InsufficientDataError, StableDomainError
from src.utils.rng import chunk_bounds, chunk_rng, path_rng, sub_seed
from src.utils.statistics import (
    Z95,
    clopper_pearson,
    mean_report,
    ordinary_fit,
    proportion_report,
    weighted_loglog_fit,
)


class TestIntervals:
    """Test binomial and normal intervals"""

    def test_clopper_pearson_edges(self):
        """Test the interval is one-sided at zero and full successes"""
        lo, hi = clopper_pearson(0, 100)
        assert lo == 0.0 and 0.0 < hi < 0.05
        lo, hi = clopper_pearson(100, 100)
        assert hi == 1.0 and 0.95 < lo < 1.0

    def test_clopper_pearson_known_value(self):
        """Test 5 of 10 against the tabulated interval"""
        lo, hi = clopper_pearson(5, 10)
        assert lo == pytest.approx(0.187086, abs=1e-5)
        assert hi == pytest.approx(0.812914, abs=1e-5)

    def test_proportion_report(self, seed):
        """Test the estimate, standard error and seed echo"""
        report = proportion_report(30, 100, seed, wall_time=1.5, censored_fraction=0.01)
        assert report.estimate == 0.3
        assert report.std_error == pytest.approx(np.sqrt(0.3 * 0.7 / 100))
        assert report.seed == seed
        assert report.lower < 0.3 < report.upper
        assert report.censored_fraction == 0.01

    def test_zero_trials(self):
        """Test an empty sample gives the uninformative interval"""
        assert clopper_pearson(0, 0) == (0.0, 1.0)
        assert proportion_report(0, 0, 1).estimate == 0.0

    def test_mean_report(self, rng):
        """Test the normal interval of a sample mean"""
        values = rng.normal(2.0, 1.0, 400)
        report = mean_report(values, 1)
        se = values.std(ddof=1) / 20.0
        assert report.ci95 == pytest.approx((values.mean() - Z95 * se, values.mean() + Z95 * se))

    def test_single_value(self):
        """Test one observation has zero standard error"""
        assert mean_report(np.array([3.0]), 1).std_error == 0.0


class TestFits:
    """Test the regressions behind the slope rows"""

    def test_exact_power_law(self):
        """Test y = 2 x^1.5 is recovered"""
        x = np.array([0.1, 0.2, 0.4, 0.8])
        fit = weighted_loglog_fit(x, 2.0 * x ** 1.5, 0.01 * 2.0 * x ** 1.5)
        assert fit.slope == pytest.approx(1.5)
        assert np.exp(fit.intercept) == pytest.approx(2.0)
        assert fit.points == 4
        assert fit.ci95[0] <= fit.slope <= fit.ci95[1]

    def test_non_positive_points_dropped(self):
        """Test zero estimates are left out of the fit"""
        fit = weighted_loglog_fit([0.1, 0.2, 0.4], [0.0, 0.2, 0.4])
        assert fit.points == 2
        assert fit.slope == pytest.approx(1.0)

    def test_too_few_points(self):
        """Test at least two positive points are needed"""
        with pytest.raises(InsufficientDataError) as info:
            weighted_loglog_fit([0.1, 0.2], [0.0, 0.3])
        assert info.value.count == 1

    def test_weights_favour_precise_points(self):
        """Test a noisy outlier barely moves the weighted slope"""
        x = np.array([0.1, 0.2, 0.4, 0.8])
        y = x.copy()
        y[-1] *= 3.0
        se = np.array([1e-4, 1e-4, 1e-4, 10.0])
        assert weighted_loglog_fit(x, y, se).slope == pytest.approx(1.0, abs=0.01)

    def test_ordinary_fit_interval(self, rng):
        """Test the t-interval of a noisy line covers its slope"""
        x = np.linspace(0, 1, 50)
        y = 0.7 * x + rng.normal(0, 0.01, 50)
        result, (lo, hi) = ordinary_fit(x, y)
        assert lo < 0.7 < hi
        assert result.slope == pytest.approx(0.7, abs=0.02)


class TestStreams:
    """Test the seed derivation"""

    def test_path_streams_reproducible(self):
        """Test the same (seed, index) gives the same draws"""
        assert path_rng(5, 2).random() == path_rng(5, 2).random()
        assert path_rng(5, 2).random() != path_rng(5, 3).random()

    def test_path_and_chunk_streams_differ(self):
        """Test path and chunk streams never coincide"""
        assert path_rng(5, 0).random() != chunk_rng(5, 0).random()

    def test_sub_seed(self):
        """Test derived seeds are deterministic and label dependent"""
        assert sub_seed(7, 1) == sub_seed(7, 1)
        assert sub_seed(7, 1) != sub_seed(7, 2)
        assert sub_seed(7, 1, 2) != sub_seed(7, 2, 1)

    def test_chunk_bounds(self):
        """Test the last chunk is shortened"""
        assert chunk_bounds(5, 2) == [(0, 0, 2), (1, 2, 4), (2, 4, 5)]
        assert chunk_bounds(0, 3) == []
        with pytest.raises(StableDomainError):
            chunk_bounds(5, 0)
