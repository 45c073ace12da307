import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np
import pandas as pd

from src.models.experiment import ExperimentConfig
from src.models.report import ExperimentOutcome

logger = logging.getLogger(__name__)

CSV_COLUMNS = [
    "experiment",
    "param_name",
    "param_value",
    "estimate",
    "std_error",
    "ci95_lo",
    "ci95_hi",
    "n_samples",
    "censored_fraction",
    "seed",
    "wall_time_s",
]


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if hasattr(value, "__dataclass_fields__"):
        return _jsonable(vars(value))
    return value


class ExportService:
    """Writes experiment outcomes as CSV rows and a JSON sidecar"""

    def to_frame(self, outcome: ExperimentOutcome) -> pd.DataFrame:
        data = []
        for row in outcome.rows:
            report = row.report
            data.append({
                "experiment": outcome.experiment,
                "param_name": row.param_name,
                "param_value": row.param_value,
                "estimate": report.estimate,
                "std_error": report.std_error,
                "ci95_lo": report.lower,
                "ci95_hi": report.upper,
                "n_samples": report.n_samples,
                "censored_fraction": report.censored_fraction,
                "seed": report.seed,
                "wall_time_s": report.wall_time,
            })
        return pd.DataFrame(data, columns=CSV_COLUMNS)

    def export_to_csv(self, outcome: ExperimentOutcome, path: Path) -> Path:
        """Export result rows; only wall_time_s differs between reruns"""
        df = self.to_frame(outcome)
        path.parent.mkdir(parents=True, exist_ok=True)
        df.to_csv(path, index=False, encoding="utf-8", float_format="%.12g")
        logger.info(f"Wrote {len(df)} rows to {path}")
        return path

    def export_sidecar(self, config: ExperimentConfig, outcome: ExperimentOutcome, path: Path) -> Path:
        """Echo the resolved configuration together with notes and extras"""
        payload = {
            "config": config.to_dict(),
            "notes": outcome.notes,
            "extras": _jsonable(outcome.extras),
            "row_notes": [
                {"param_name": row.param_name, "param_value": row.param_value, "notes": row.report.notes}
                for row in outcome.rows if row.report.notes
            ],
            "created": datetime.now().isoformat(timespec="seconds"),
        }
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(payload, indent=2, default=str), encoding="utf-8")
        return path

    def export_all(self, config: ExperimentConfig, outcome: ExperimentOutcome,
                   directory: Path, name: Optional[str] = None) -> Dict[str, Path]:
        stem = name or config.output.name or config.experiment
        return {
            "csv": self.export_to_csv(outcome, directory / f"{stem}.csv"),
            "json": self.export_sidecar(config, outcome, directory / f"{stem}.json"),
        }
