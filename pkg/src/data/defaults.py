"""Documented acceptance configurations, one per experiment.

The YAML files under configs/ hold the same documents; tests run them
with a reduced number of paths.
"""

import copy
from typing import Any, Dict, Optional


# Two drivers, α = (1, 1.5), identity coefficients unless stated
BASE_INDICES = [1.0, 1.5]

# k with k^2 = 1/2: a centred sub-box holding half the volume of M_1 in d = 2
HALF_VOLUME_DILATION = 0.5 ** 0.5

ACCEPTANCE_CONFIGS: Dict[str, Dict[str, Any]] = {
    "driver-selftest": {
        "experiment": "driver-selftest",
        "indices": BASE_INDICES,
        "params": {"gammas": [0.5, 1.0, 1.5], "xis": [0.5, 1.0, 2.0], "decomposition_paths": 100_000},
        "sampling": {"n_paths": 1_000_000},
        "seed": 11,
    },
    "exit-time": {
        "experiment": "exit-time",
        "indices": BASE_INDICES,
        "coefficients": {"preset": "identity"},
        "params": {"r_list": [0.1, 0.2, 0.4, 0.8]},
        "sampling": {"n_paths": 100_000},
        "seed": 12,
    },
    "jump-exit": {
        "experiment": "jump-exit",
        "indices": BASE_INDICES,
        "coefficients": {"preset": "identity"},
        "params": {"r": 0.1, "R_list": [0.2, 0.4, 0.8]},
        "sampling": {"n_paths": 100_000},
        "seed": 13,
    },
    "landing-profile": {
        "experiment": "landing-profile",
        "indices": BASE_INDICES,
        "params": {"r": 1.0, "rho": 0.5, "depth": 4},
        "sampling": {"n_paths": 100_000},
        "seed": 14,
    },
    "targeted-jump": {
        "experiment": "targeted-jump",
        "indices": BASE_INDICES,
        "coefficients": {"preset": "identity"},
        "params": {"axis": 0, "xi": 0.5, "gamma_list": [0.3, 0.45], "t0": 0.5},
        "sampling": {"n_paths": 100_000},
        "seed": 15,
    },
    "tube": {
        "experiment": "tube",
        "indices": BASE_INDICES,
        "coefficients": {"preset": "identity"},
        "params": {
            "curve": {"times": [0.0, 0.5], "points": [[0.0, 0.0], [0.2, 0.0]]},
            "epsilon_list": [0.3, 0.4],
        },
        "sampling": {"n_paths": 100_000},
        "seed": 16,
    },
    "segment-tube": {
        "experiment": "segment-tube",
        "indices": BASE_INDICES,
        "params": {"direction": [1.0, 0.0], "length": 0.3, "epsilon_list": [0.2, 0.4], "end_radius": 0.2,
                   "t1": 0.1},
        "sampling": {"n_paths": 100_000},
        "seed": 17,
    },
    "hit": {
        "experiment": "hit",
        "indices": BASE_INDICES,
        "coefficients": {"preset": "identity"},
        "params": {
            "r": 1.0,
            "targets": [{"center": [0.0, 0.0], "r": 1.0, "k": HALF_VOLUME_DILATION}],
        },
        "sampling": {"n_paths": 100_000},
        "seed": 18,
    },
    "corner-hit": {
        "experiment": "corner-hit",
        "indices": BASE_INDICES,
        "params": {"r": 1.0, "eps": 0.1, "delta": 0.2, "y": [0.5, 0.5], "points_per_axis": 3},
        "sampling": {"n_paths": 100_000},
        "seed": 19,
    },
    "harmonic": {
        "experiment": "harmonic",
        "indices": BASE_INDICES,
        "params": {"g": {"kind": "half_space", "axis": 0, "level": 0.0}, "points_per_axis": 5},
        "sampling": {"n_paths": 20_000},
        "seed": 20,
    },
    "holder": {
        "experiment": "holder",
        "indices": BASE_INDICES,
        "params": {"g": {"kind": "half_space", "axis": 0, "level": 0.0}, "points_per_axis": 5},
        "sampling": {"n_paths": 20_000},
        "seed": 21,
    },
    "oscillation": {
        "experiment": "oscillation",
        "indices": BASE_INDICES,
        "params": {"g": {"kind": "half_space", "axis": 0, "level": 0.0}, "rho": 0.6, "k_max": 4},
        "sampling": {"n_paths": 20_000},
        "seed": 22,
    },
    "levy-system": {
        "experiment": "levy-system",
        "indices": BASE_INDICES,
        "coefficients": {"preset": "identity"},
        "params": {"source_r": 0.3, "target_axis": 0, "target_distance": 1.0, "t": 1.0},
        "sampling": {"n_paths": 100_000},
        "seed": 23,
    },
    "dynkin": {
        "experiment": "dynkin",
        "indices": BASE_INDICES,
        "coefficients": {"preset": "rotation", "theta0": 0.3, "amplitude": 0.2},
        "params": {"f": {"kind": "cosine", "xi": [1.0, 1.0]}, "t_list": [0.01]},
        "sampling": {"n_paths": 100_000},
        "seed": 24,
    },
}


def acceptance_config(experiment: str, n_paths: Optional[int] = None, **params) -> Dict[str, Any]:
    """A fresh copy of the documented configuration, optionally scaled down"""
    document = copy.deepcopy(ACCEPTANCE_CONFIGS[experiment])
    if n_paths is not None:
        document.setdefault("sampling", {})["n_paths"] = n_paths
    document.setdefault("params", {}).update(params)
    return document


# Richer settings of the same experiments, shipped under configs/variants/
VARIANT_CONFIGS: Dict[str, Dict[str, Any]] = {
    "targeted-jump-rotation": {
        "experiment": "targeted-jump",
        "indices": BASE_INDICES,
        "coefficients": {"preset": "rotation", "theta0": 0.3, "amplitude": 0.2},
        "params": {"axis": 1, "xi": 0.5, "gamma_list": [0.2, 0.4], "t0": 0.5},
        "sampling": {"n_paths": 100_000},
        "seed": 15,
    },
    "tube-polyline": {
        "experiment": "tube",
        "indices": BASE_INDICES,
        "params": {
            "curve": {"times": [0.0, 0.05, 0.1], "points": [[0.0, 0.0], [0.2, 0.1], [0.3, 0.3]]},
            "epsilon_list": [0.2, 0.4],
        },
        "sampling": {"n_paths": 100_000},
        "seed": 16,
    },
    "hit-two-boxes": {
        "experiment": "hit",
        "indices": BASE_INDICES,
        "params": {
            "r": 1.0,
            "targets": [
                {"center": [0.5, 0.0], "r": 0.5, "k": 0.5},
                {"center": [-0.5, 0.0], "r": 0.5, "k": 0.5},
            ],
        },
        "sampling": {"n_paths": 100_000},
        "seed": 18,
    },
    "levy-system-unit-source": {
        "experiment": "levy-system",
        "indices": BASE_INDICES,
        "coefficients": {"preset": "identity"},
        "params": {"source_r": 1.0, "target_axis": 0, "target_lo": 2.0, "t": 1.0},
        "sampling": {"n_paths": 100_000},
        "seed": 23,
    },
}


def variant_config(name: str, n_paths: Optional[int] = None, **params) -> Dict[str, Any]:
    document = copy.deepcopy(VARIANT_CONFIGS[name])
    if n_paths is not None:
        document.setdefault("sampling", {})["n_paths"] = n_paths
    document.setdefault("params", {}).update(params)
    return document
