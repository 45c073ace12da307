"""Unit tests for the experiment registry"""

import pytest

from src.handlers import register_all_experiments
from src.lab.registry import ExperimentRegistry, ParamSpec
from src.models import EXPERIMENTS, ExperimentOutcome
from src.models.errors import ConfigurationError


class TestParamSpec:
    """Test parameter declarations"""

    def test_unknown_kind(self):
        """Test kinds are restricted to the known set"""
        with pytest.raises(ConfigurationError):
            ParamSpec("x", "matrix")


class TestRegistry:
    """Test registration and lookup"""

    def test_decorator_registers(self):
        """Test the decorator keeps the function and records its metadata"""
        registry = ExperimentRegistry()

        @registry.experiment("demo", params=(ParamSpec("n", "int", default=3), ParamSpec("m", "float", required=True)),
                             log_scale=True)
        def run_demo(config, coefficients):
            """Demo experiment

            Longer text that is not part of the description.
            """
            return ExperimentOutcome("demo")

        handler = registry.get("demo")
        assert handler.run is run_demo
        assert handler.description == "Demo experiment"
        assert handler.param_names == ["n", "m"]
        assert handler.defaults() == {"n": 3}
        assert handler.log_scale
        assert "demo" in registry and len(registry) == 1

    def test_unknown_name(self):
        """Test lookups of unregistered experiments"""
        with pytest.raises(KeyError):
            ExperimentRegistry().get("missing")

    def test_all_experiments_registered(self, registry):
        """Test every documented experiment has a handler"""
        assert sorted(registry.names()) == sorted(EXPERIMENTS)

    def test_register_all_returns_registry(self):
        """Test registration works on a fresh registry"""
        fresh = ExperimentRegistry()
        assert register_all_experiments(fresh) is fresh
        assert all(handler.description for handler in fresh)

    def test_driver_selftest_is_analytic(self, registry):
        """Test only the driver self-test skips the SDE engine"""
        offline = [handler.name for handler in registry if not handler.uses_simulation]
        assert offline == ["driver-selftest"]
