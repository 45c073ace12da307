"""Loading and validating experiment configuration files.

Validation never stops at the first problem: every diagnostic is collected
so `validate` can report them all at once.
"""

import logging
import numbers
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional

import yaml
from fuzzywuzzy import process

from src.lab.config import config as lab_config
from src.lab.registry import ExperimentRegistry, ParamSpec
from src.models.errors import ConfigurationError, StableDomainError
from src.models.experiment import (
    CoefficientSpec,
    ExperimentConfig,
    OutputConfig,
    QuadratureConfig,
    SamplingConfig,
)
from src.models.indices import INDEX_MARGIN, StableIndexSet
from src.services.coefficient_service import PRESET_PARAMS, build_coefficient_field
from src.services.scalar_field_service import build_scalar_field

logger = logging.getLogger(__name__)

TOP_LEVEL_KEYS = ("experiment", "indices", "coefficients", "params", "sampling", "quadrature", "seed",
                  "threads", "output")
SAMPLING_KEYS = ("n_paths", "horizon", "grid", "jump_threshold")
QUADRATURE_KEYS = ("inner_cut", "outer_cut", "tolerance", "max_refinements", "tail_tolerance")
OUTPUT_KEYS = ("directory", "name", "plot")
SUGGESTION_CUTOFF = 70


class ConfigLoader:
    """Reads a configuration file into a plain nested dict"""

    def load(self, path: Path) -> Dict[str, Any]:
        raise NotImplementedError


class YamlConfigLoader(ConfigLoader):
    def load(self, path: Path) -> Dict[str, Any]:
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigurationError(f"cannot read {path}: {e}", [f"{path}: unreadable ({e.strerror})"]) from e
        try:
            document = yaml.safe_load(text)
        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
            raise ConfigurationError(f"{path}: invalid YAML at {where}", [f"{path}: {where}: {e}"]) from e
        if document is None:
            return {}
        if not isinstance(document, dict):
            raise ConfigurationError(f"{path}: top level must be a mapping", [f"{path}: top level must be a mapping"])
        return document


def suggest(key: str, known: Iterable[str]) -> str:
    """' (did you mean ...?)' for the closest known key, or ''"""
    choices = list(known)
    if not choices:
        return ""
    match = process.extractOne(str(key), choices, score_cutoff=SUGGESTION_CUTOFF)
    return f" (did you mean '{match[0]}'?)" if match else ""


def _unknown_keys(section: str, data: Dict[str, Any], known: Iterable[str]) -> List[str]:
    known = list(known)
    return [
        f"{section}{key}: unknown key{suggest(key, known)}"
        for key in data if key not in known
    ]


def _is_number(value: Any) -> bool:
    return isinstance(value, numbers.Real) and not isinstance(value, bool)


def _is_int(value: Any) -> bool:
    return isinstance(value, numbers.Integral) and not isinstance(value, bool)


def _check_indices(value: Any) -> List[str]:
    if value is None:
        return ["indices: required field missing"]
    if not isinstance(value, list) or len(value) < 2:
        return ["indices: must be a list of at least two stability indices"]
    problems = []
    for i, alpha in enumerate(value):
        if not _is_number(alpha):
            problems.append(f"indices[{i}]: {alpha!r} is not a number")
        elif not (0.0 < alpha < 2.0):
            problems.append(f"indices[{i}]: {alpha} must lie in the open interval (0,2)")
        elif not (INDEX_MARGIN <= alpha <= 2.0 - INDEX_MARGIN):
            problems.append(f"indices[{i}]: {alpha} is closer than {INDEX_MARGIN} to the ends of (0,2)")
    return problems


def _check_vector(name: str, value: Any, dim: Optional[int]) -> List[str]:
    if not isinstance(value, list) or not all(_is_number(v) for v in value):
        return [f"params.{name}: must be a list of numbers"]
    if dim is not None and len(value) != dim:
        return [f"params.{name}: has {len(value)} entries, indices need {dim}"]
    return []


def _check_box(name: str, value: Any, dim: Optional[int]) -> List[str]:
    if not isinstance(value, dict):
        return [f"{name}: must be a mapping with center, r and optional k"]
    problems = _unknown_keys(f"{name}.", value, ("center", "r", "k"))
    problems += [p.replace("params.center", f"{name}.center") for p in _check_vector("center", value.get("center"), dim)]
    r = value.get("r")
    if not _is_number(r) or not (0.0 < r <= 1.0):
        problems.append(f"{name}.r: must lie in (0,1]")
    k = value.get("k", 1.0)
    if not _is_number(k) or k <= 0:
        problems.append(f"{name}.k: must be positive")
    return problems


def check_param(spec: ParamSpec, value: Any, dim: Optional[int]) -> List[str]:
    """Type-level diagnostics for one parameter value"""
    name = spec.name
    kind = spec.kind
    if kind == "float":
        return [] if _is_number(value) else [f"params.{name}: must be a number"]
    if kind == "int":
        return [] if _is_int(value) else [f"params.{name}: must be an integer"]
    if kind == "bool":
        return [] if isinstance(value, bool) else [f"params.{name}: must be true or false"]
    if kind in ("point", "vector"):
        return _check_vector(name, value, dim)
    if kind == "float_list":
        if not isinstance(value, list) or not value or not all(_is_number(v) for v in value):
            return [f"params.{name}: must be a non-empty list of numbers"]
        return []
    if kind == "points":
        if not isinstance(value, list) or not value:
            return [f"params.{name}: must be a non-empty list of points"]
        problems = []
        for i, point in enumerate(value):
            problems += [p.replace(f"params.{name}", f"params.{name}[{i}]") for p in _check_vector(name, point, dim)]
        return problems
    if kind == "field":
        if not isinstance(value, dict) or "kind" not in value:
            return [f"params.{name}: must be a mapping with a 'kind' key"]
        try:
            build_scalar_field(value)
        except (ConfigurationError, ValueError) as e:
            return [f"params.{name}: {e}"]
        return []
    if kind == "boxes":
        if not isinstance(value, list) or not value:
            return [f"params.{name}: must be a non-empty list of boxes"]
        problems = []
        for i, box in enumerate(value):
            problems += _check_box(f"params.{name}[{i}]", box, dim)
        return problems
    if kind == "polyline":
        if not isinstance(value, dict):
            return [f"params.{name}: must be a mapping with times and points"]
        problems = _unknown_keys(f"params.{name}.", value, ("times", "points"))
        times = value.get("times")
        points = value.get("points")
        if not isinstance(times, list) or len(times) < 2 or not all(_is_number(t) for t in times):
            problems.append(f"params.{name}.times: must list at least two numbers")
        elif times[0] != 0 or any(b <= a for a, b in zip(times, times[1:])):
            problems.append(f"params.{name}.times: must start at 0 and increase strictly")
        if not isinstance(points, list) or (isinstance(times, list) and len(points) != len(times)):
            problems.append(f"params.{name}.points: must give one point per time")
        else:
            for i, point in enumerate(points):
                problems += [p.replace(f"params.{name}", f"params.{name}.points[{i}]")
                             for p in _check_vector(name, point, dim)]
        return problems
    return [f"params.{name}: unsupported kind {kind}"]


def _check_section(name: str, data: Any, keys, rules) -> List[str]:
    if data is None:
        return []
    if not isinstance(data, dict):
        return [f"{name}: must be a mapping"]
    problems = _unknown_keys(f"{name}.", data, keys)
    for key, rule, message in rules:
        value = data.get(key)
        if value is not None and not rule(value):
            problems.append(f"{name}.{key}: {message}")
    return problems


def validate_document(document: Dict[str, Any], registry: ExperimentRegistry) -> List[str]:
    """All diagnostics for a loaded configuration; empty when it is valid"""
    problems = _unknown_keys("", document, TOP_LEVEL_KEYS)

    experiment = document.get("experiment")
    handler = None
    if experiment is None:
        problems.append("experiment: required field missing")
    elif experiment not in registry:
        problems.append(f"experiment: unknown experiment '{experiment}'{suggest(experiment, registry.names())}")
    else:
        handler = registry.get(experiment)

    index_problems = _check_indices(document.get("indices"))
    problems += index_problems
    indices = None
    if not index_problems:
        indices = StableIndexSet.of(document["indices"])
    dim = indices.dim if indices else None

    seed = document.get("seed")
    if seed is None:
        problems.append("seed: required field missing")
    elif not _is_int(seed) or seed < 0:
        problems.append("seed: must be a non-negative integer")
    threads = document.get("threads")
    if threads is not None and (not _is_int(threads) or threads < 1):
        problems.append("threads: must be an integer ≥ 1")

    problems += _check_coefficients(document.get("coefficients"), dim)
    problems += _check_section("sampling", document.get("sampling"), SAMPLING_KEYS, [
        ("n_paths", lambda v: _is_int(v) and v > 0, "must be a positive integer"),
        ("horizon", lambda v: _is_number(v) and v > 0, "must be positive"),
        ("grid", lambda v: _is_number(v) and v > 0, "must be positive"),
        ("jump_threshold", lambda v: _is_number(v) and v > 0, "must be positive"),
    ])
    problems += _check_quadrature(document.get("quadrature"))
    problems += _check_section("output", document.get("output"), OUTPUT_KEYS, [
        ("directory", lambda v: isinstance(v, str), "must be a path"),
        ("name", lambda v: isinstance(v, str), "must be a string"),
        ("plot", lambda v: isinstance(v, bool), "must be true or false"),
    ])

    params = document.get("params") or {}
    if not isinstance(params, dict):
        problems.append("params: must be a mapping")
    elif handler is not None:
        problems += _unknown_keys("params.", params, handler.param_names)
        typed_ok = True
        for spec in handler.params:
            if spec.name not in params or params[spec.name] is None:
                if spec.required:
                    problems.append(f"params.{spec.name}: required field missing")
                    typed_ok = False
                continue
            found = check_param(spec, params[spec.name], dim)
            typed_ok &= not found
            problems += found
        if typed_ok and indices is not None and handler.check is not None:
            merged = {**handler.defaults(), **{k: v for k, v in params.items() if v is not None}}
            problems += [f"params: {p}" for p in handler.check(merged, indices)]
    return problems


def _check_coefficients(data: Any, dim: Optional[int]) -> List[str]:
    if data is None:
        return []
    if not isinstance(data, dict):
        return ["coefficients: must be a mapping with a 'preset' key"]
    preset = data.get("preset", "identity")
    if preset not in PRESET_PARAMS:
        return [f"coefficients.preset: unknown preset '{preset}'{suggest(preset, PRESET_PARAMS)}"]
    params = {k: v for k, v in data.items() if k != "preset"}
    problems = _unknown_keys("coefficients.", params, PRESET_PARAMS[preset])
    if not problems and dim is not None:
        try:
            build_coefficient_field(CoefficientSpec(preset, params), dim)
        except (ConfigurationError, ValueError, TypeError) as e:
            problems.append(f"coefficients: {e}")
    return problems


def _check_quadrature(data: Any) -> List[str]:
    problems = _check_section("quadrature", data, QUADRATURE_KEYS, [])
    if problems or data is None:
        return problems
    try:
        QuadratureConfig(**data)
    except (TypeError, ValueError) as e:
        problems.append(f"quadrature: {e}")
    return problems


def build_config(document: Dict[str, Any], registry: ExperimentRegistry,
                 overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """Validated ExperimentConfig; raises ConfigurationError with every diagnostic"""
    document = dict(document)
    overrides = overrides or {}
    if overrides.get("seed") is not None:
        document["seed"] = overrides["seed"]
    if overrides.get("threads") is not None:
        document["threads"] = overrides["threads"]
    problems = validate_document(document, registry)
    if problems:
        raise ConfigurationError(f"{len(problems)} configuration problem(s)", problems)

    handler = registry.get(document["experiment"])
    coefficients = dict(document.get("coefficients") or {"preset": "identity"})
    preset = coefficients.pop("preset", "identity")
    params = {**handler.defaults(), **{k: v for k, v in (document.get("params") or {}).items() if v is not None}}
    output = dict(document.get("output") or {})
    if overrides.get("out") is not None:
        output["directory"] = str(overrides["out"])
    if overrides.get("plot"):
        output["plot"] = True
    try:
        indices = StableIndexSet.of(document["indices"])
    except StableDomainError as e:
        raise ConfigurationError(str(e), [str(e)]) from e
    return ExperimentConfig(
        experiment=document["experiment"],
        indices=indices,
        coefficients=CoefficientSpec(preset, coefficients),
        params=params,
        sampling=SamplingConfig(**(document.get("sampling") or {})),
        seed=int(document["seed"]),
        output=OutputConfig(**output),
        threads=int(document.get("threads") or lab_config.THREADS),
        quadrature=QuadratureConfig(**(document.get("quadrature") or {})),
    )
