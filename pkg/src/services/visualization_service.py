import logging
from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import seaborn as sns  # noqa: E402

from src.models.report import ExperimentOutcome, ScanResult  # noqa: E402

logger = logging.getLogger(__name__)

# Set style for all plots
sns.set_style("whitegrid")
sns.set_palette("husl")


class ResultPlotter:
    """Static SVG plots of experiment outcomes"""

    def __init__(self):
        self.figure_size = (8, 5)

    def plot_outcome(self, outcome: ExperimentOutcome, path: Path) -> Optional[Path]:
        """One panel per scan; nothing is written when there is nothing to draw"""
        scans = [scan for scan in outcome.scans if scan.rows]
        if not scans:
            logger.info(f"No scan data to plot for {outcome.experiment}")
            return None

        fig, axes = plt.subplots(1, len(scans), figsize=(self.figure_size[0] * len(scans), self.figure_size[1]),
                                 squeeze=False)
        for ax, scan in zip(axes[0], scans):
            self._plot_scan(ax, scan, outcome.log_scale)
        fig.suptitle(outcome.experiment, fontweight="bold")
        fig.tight_layout()

        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, format="svg", bbox_inches="tight")
        plt.close(fig)
        logger.info(f"Wrote plot {path}")
        return path

    def _plot_scan(self, ax: plt.Axes, scan: ScanResult, log_scale: bool) -> None:
        x = np.array([value for value, _ in scan.rows])
        y = np.array([report.estimate for _, report in scan.rows])
        lo = np.array([report.lower for _, report in scan.rows])
        hi = np.array([report.upper for _, report in scan.rows])
        err = np.vstack([np.clip(y - lo, 0, None), np.clip(hi - y, 0, None)])

        ax.errorbar(x, y, yerr=err, fmt="o-", linewidth=2, markersize=6, capsize=3, label="estimate (95% CI)")
        if scan.fit is not None and log_scale:
            grid = np.geomspace(x[x > 0].min(), x.max(), 50)
            ax.plot(grid, np.exp(scan.fit.intercept) * grid ** scan.fit.slope, "--", alpha=0.7,
                    label=f"fit slope {scan.fit.slope:.3f}")
        if log_scale:
            ax.set_xscale("log")
            if np.all(y > 0):
                ax.set_yscale("log")
        ax.set_xlabel(scan.param_name, fontsize=12)
        ax.set_ylabel("estimate", fontsize=12)
        ax.grid(True, alpha=0.3)
        ax.legend(loc="best")
