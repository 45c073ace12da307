from dataclasses import dataclass, field, asdict
from typing import Any, Dict, List, Optional, Tuple


@dataclass
class EstimateReport:
    """Monte Carlo estimate with its uncertainty"""

    estimate: float
    std_error: float
    ci95: Tuple[float, float]
    n_samples: int
    seed: int
    wall_time: float = 0.0
    censored_fraction: float = 0.0
    notes: List[str] = field(default_factory=list)

    def __post_init__(self):
        lo, hi = self.ci95
        # Clamp rounding noise so the interval always contains the estimate
        self.ci95 = (min(float(lo), self.estimate), max(float(hi), self.estimate))
        self.std_error = max(0.0, float(self.std_error))

    @property
    def lower(self) -> float:
        return self.ci95[0]

    @property
    def upper(self) -> float:
        return self.ci95[1]

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class SlopeFit:
    """Weighted least-squares line in log-log coordinates"""

    slope: float
    intercept: float
    std_error: float
    ci95: Tuple[float, float]
    points: int


@dataclass
class HolderFit:
    """Fitted Hölder exponent of a harmonic function"""

    beta_hat: float
    c_hat: float
    pairs_used: int
    r_scale: float
    residual: float
    slope_ci95: Tuple[float, float] = (float("nan"), float("nan"))


@dataclass
class ScanResult:
    """Per-parameter reports plus an optional slope fit"""

    param_name: str
    rows: List[Tuple[float, EstimateReport]]
    fit: Optional[SlopeFit] = None
    notes: List[str] = field(default_factory=list)


@dataclass
class ResultRow:
    """One CSV row: a parameter value and its estimate"""

    param_name: str
    param_value: float
    report: EstimateReport


@dataclass
class ExperimentOutcome:
    """Everything a handler produced for one experiment run"""

    experiment: str
    rows: List[ResultRow] = field(default_factory=list)
    scans: List[ScanResult] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)
    log_scale: bool = False
    extras: Dict[str, Any] = field(default_factory=dict)

    def add_scan(self, scan: ScanResult) -> None:
        """Append the scan's rows and, when fitted, a `slope` row"""
        self.scans.append(scan)
        for value, report in scan.rows:
            self.rows.append(ResultRow(scan.param_name, value, report))
        if scan.fit is not None:
            fit = scan.fit
            seed = scan.rows[0][1].seed if scan.rows else 0
            slope = EstimateReport(
                estimate=fit.slope, std_error=fit.std_error, ci95=fit.ci95,
                n_samples=sum(report.n_samples for _, report in scan.rows), seed=seed,
                wall_time=sum(report.wall_time for _, report in scan.rows),
            )
            self.rows.append(ResultRow("slope", float(fit.points), slope))
        self.notes.extend(scan.notes)
