import logging
import time
from pathlib import Path
from typing import Dict, List, Optional

from src.handlers import register_all_experiments
from src.lab.config import config as lab_config
from src.lab.registry import ExperimentRegistry
from src.models.errors import ConfigurationError, StableLabError
from src.models.experiment import ExperimentConfig
from src.models.report import ExperimentOutcome
from src.services.coefficient_service import build_coefficient_field
from src.services.export_service import ExportService
from src.services.visualization_service import ResultPlotter
from src.utils.validation import ConfigLoader, YamlConfigLoader, build_config, validate_document

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_RUNTIME_ERROR = 2


class StableLab:
    """Main application class: validates configs, runs experiments, writes reports"""

    def __init__(self, loader: Optional[ConfigLoader] = None, registry: Optional[ExperimentRegistry] = None,
                 setup_logging: bool = True):
        self.loader = loader or YamlConfigLoader()
        self.registry = registry or register_all_experiments(ExperimentRegistry())
        self.exporter = ExportService()
        self.plotter = ResultPlotter()
        if setup_logging:
            self._setup_logging()

    def _setup_logging(self):
        """Configure logging"""
        log_level = getattr(logging, lab_config.LOG_LEVEL.upper(), logging.INFO)
        handlers = [logging.StreamHandler()]
        if lab_config.LOG_FILE:
            handlers.append(logging.FileHandler(lab_config.LOG_FILE, encoding='utf-8'))

        logging.basicConfig(
            level=log_level,
            format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            handlers=handlers
        )

    def validate(self, path: Path) -> List[str]:
        """Every diagnostic for the configuration file; empty when it is valid"""
        try:
            document = self.loader.load(Path(path))
        except ConfigurationError as e:
            return e.diagnostics or [str(e)]
        return validate_document(document, self.registry)

    def load(self, path: Path, overrides: Optional[Dict] = None) -> ExperimentConfig:
        return build_config(self.loader.load(Path(path)), self.registry, overrides)

    def execute(self, config: ExperimentConfig) -> ExperimentOutcome:
        """Run the experiment named in the config and return its outcome"""
        handler = self.registry.get(config.experiment)
        coefficients = build_coefficient_field(config.coefficients, config.dim)
        logger.info(f"Starting experiment {config.experiment} (seed={config.seed}, threads={config.threads}, "
                    f"n={config.sampling.n_paths})")
        began = time.perf_counter()
        outcome = handler.run(config, coefficients)
        outcome.log_scale = handler.log_scale
        logger.info(f"Finished {config.experiment} in {time.perf_counter() - began:.1f}s with "
                    f"{len(outcome.rows)} rows")
        for note in outcome.notes:
            logger.info(f"{config.experiment}: {note}")
        return outcome

    def write(self, config: ExperimentConfig, outcome: ExperimentOutcome) -> Dict[str, Path]:
        directory = Path(config.output.directory or lab_config.OUTPUT_DIR)
        files = self.exporter.export_all(config, outcome, directory)
        if config.output.plot:
            plot = self.plotter.plot_outcome(outcome, files["csv"].with_suffix(".svg"))
            if plot is not None:
                files["svg"] = plot
        return files

    def run(self, path: Path, plot: bool = False, threads: Optional[int] = None, seed: Optional[int] = None,
            out: Optional[Path] = None) -> int:
        """Load, run and write one experiment; returns the process exit code"""
        overrides = {"plot": plot, "threads": threads, "seed": seed, "out": out}
        try:
            config = self.load(path, overrides)
        except ConfigurationError as e:
            logger.error(f"Invalid configuration {path}: {e}")
            for diagnostic in e.diagnostics:
                logger.error(f"  {diagnostic}")
            return EXIT_CONFIG_ERROR

        try:
            outcome = self.execute(config)
            files = self.write(config, outcome)
        except ConfigurationError as e:
            logger.error(f"Invalid configuration {path}: {e}")
            for diagnostic in e.diagnostics:
                logger.error(f"  {diagnostic}")
            return EXIT_CONFIG_ERROR
        except StableLabError as e:
            logger.error(f"Experiment {config.experiment} failed: {e}", exc_info=True)
            return EXIT_RUNTIME_ERROR
        except Exception as e:
            logger.error(f"Unexpected error in {config.experiment}: {e}", exc_info=True)
            return EXIT_RUNTIME_ERROR

        for kind, file in files.items():
            logger.info(f"Wrote {kind}: {file}")
        return EXIT_OK

    def describe(self) -> List[str]:
        """One line per registered experiment"""
        lines = []
        for handler in self.registry:
            params = ", ".join(f"{spec.name}{'*' if spec.required else ''}" for spec in handler.params)
            lines.append(f"{handler.name:16} {handler.description} [{params}]")
        return lines


def create_lab(**kwargs) -> StableLab:
    """Factory function to create the lab application"""
    return StableLab(**kwargs)
