from src.lab.registry import ExperimentRegistry

from .driver import register_driver_experiments
from .scaling import register_scaling_experiments
from .support import register_support_experiments
from .harmonic import register_harmonic_experiments
from .martingale import register_martingale_experiments

def register_all_experiments(registry: ExperimentRegistry) -> ExperimentRegistry:
    """Register all experiment handlers"""
    register_driver_experiments(registry)
    register_scaling_experiments(registry)
    register_support_experiments(registry)
    register_harmonic_experiments(registry)
    register_martingale_experiments(registry)
    return registry
