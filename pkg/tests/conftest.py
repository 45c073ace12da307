"""Pytest configuration and fixtures"""

import numpy as np
import pytest
from faker import Faker

from src.handlers import register_all_experiments
from src.lab.app import create_lab
from src.lab.registry import ExperimentRegistry
from src.models import AnisotropicBox, SamplingConfig, StableIndexSet
from src.services.coefficient_service import ConstantField, RotationField

fake = Faker()
Faker.seed(1234)


@pytest.fixture
def rng() -> np.random.Generator:
    """Deterministic generator for a single test"""
    return np.random.default_rng(20240611)


@pytest.fixture
def seed() -> int:
    """A random but reproducible master seed"""
    return fake.random_int(min=1, max=2**31 - 1)


@pytest.fixture
def indices() -> StableIndexSet:
    """The two-driver setting α = (1, 1.5) used throughout the acceptance runs"""
    return StableIndexSet.of([1.0, 1.5])


@pytest.fixture
def indices_3d() -> StableIndexSet:
    return StableIndexSet.of([0.8, 1.2, 1.7])


@pytest.fixture
def identity(indices) -> ConstantField:
    return ConstantField(np.eye(indices.dim))


@pytest.fixture
def rotation(indices) -> RotationField:
    """Non-constant coefficients: a rotation whose angle varies in space"""
    return RotationField(indices.dim, theta0=0.3, amplitude=0.2)


@pytest.fixture
def unit_box(indices) -> AnisotropicBox:
    return AnisotropicBox.around([0.0, 0.0], 1.0, indices)


@pytest.fixture
def small_sampling() -> SamplingConfig:
    return SamplingConfig(n_paths=2000)


@pytest.fixture
def registry() -> ExperimentRegistry:
    return register_all_experiments(ExperimentRegistry())


@pytest.fixture
def lab(registry):
    """Lab application without touching the logging configuration"""
    return create_lab(registry=registry, setup_logging=False)


@pytest.fixture
def random_point(indices):
    """Factory for random points inside the unit box"""
    def make(scale: float = 0.5):
        return [fake.pyfloat(min_value=-scale, max_value=scale) for _ in range(indices.dim)]
    return make
