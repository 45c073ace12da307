"""Experiment registry: name -> handler, parameter schema and domain checks"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterator, List, Optional, Tuple

from src.models.errors import ConfigurationError
from src.models.experiment import ExperimentConfig
from src.models.indices import StableIndexSet
from src.models.report import ExperimentOutcome
from src.services.coefficient_service import CoefficientField

logger = logging.getLogger(__name__)

PARAM_KINDS = ("float", "int", "bool", "point", "vector", "float_list", "points", "field", "boxes", "polyline")

RunFunction = Callable[[ExperimentConfig, CoefficientField], ExperimentOutcome]
CheckFunction = Callable[[Dict[str, Any], StableIndexSet], List[str]]


@dataclass(frozen=True)
class ParamSpec:
    """One experiment parameter as it appears under `params:`"""

    name: str
    kind: str
    required: bool = False
    default: Any = None
    help: str = ""

    def __post_init__(self):
        if self.kind not in PARAM_KINDS:
            raise ConfigurationError(f"unknown parameter kind '{self.kind}'")


@dataclass
class ExperimentHandler:
    name: str
    run: RunFunction
    params: Tuple[ParamSpec, ...] = ()
    check: Optional[CheckFunction] = None
    log_scale: bool = False
    description: str = ""
    uses_simulation: bool = True

    @property
    def param_names(self) -> List[str]:
        return [spec.name for spec in self.params]

    def defaults(self) -> Dict[str, Any]:
        return {spec.name: spec.default for spec in self.params if not spec.required}


@dataclass
class ExperimentRegistry:
    """Handlers keyed by experiment name"""

    _handlers: Dict[str, ExperimentHandler] = field(default_factory=dict)

    def experiment(self, name: str, params: Tuple[ParamSpec, ...] = (), check: Optional[CheckFunction] = None,
                   log_scale: bool = False, uses_simulation: bool = True):
        """Decorator registering a run function under `name`"""

        def decorator(run: RunFunction) -> RunFunction:
            if name in self._handlers:
                logger.debug(f"Replacing handler for experiment {name}")
            doc = (run.__doc__ or "").strip().splitlines()
            self._handlers[name] = ExperimentHandler(
                name=name, run=run, params=tuple(params), check=check, log_scale=log_scale,
                description=doc[0] if doc else "", uses_simulation=uses_simulation,
            )
            return run

        return decorator

    def get(self, name: str) -> ExperimentHandler:
        return self._handlers[name]

    def names(self) -> List[str]:
        return list(self._handlers)

    def __contains__(self, name: str) -> bool:
        return name in self._handlers

    def __iter__(self) -> Iterator[ExperimentHandler]:
        return iter(self._handlers.values())

    def __len__(self):
        return len(self._handlers)
