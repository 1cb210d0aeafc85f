"""JSON artifacts written by the command-line front end."""

from datetime import datetime
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field


class StageRecord(BaseModel):
    """Diagnostics of one annealing stage.

    Attributes:
        kappa (float): Multiplicity of the stage.
        iterations (int): Sweeps, burn-in included.
        burn_in (int): Leading sweeps discarded.
        wall_time (float): Seconds.
        acceptance_rate (float): Accepted over proposed λ moves.
        ess_min (float): Smallest coefficient ESS.
        nu_mean (float): Mean of ν over the kept sweeps.
    """
    kappa: float
    iterations: int
    burn_in: int
    wall_time: float
    acceptance_rate: float
    ess_min: float
    nu_mean: float


class FitSummary(BaseModel):
    """Posterior summaries of one chain."""
    names: List[str]
    kappa: float
    kept: int
    posterior_mean: List[float]
    posterior_sd: List[float]
    posterior_mean_raw: List[float]
    ess: List[float]
    degenerate: List[bool] = Field(default_factory=list)
    nu_mean: float
    nu_sd: float
    ess_nu: float
    acceptance_rate: float
    wall_time: float
    column_scales: List[float]
    intercept: bool
    slice_rejections: Optional[Dict[str, float]] = None


class PointEstimateRecord(BaseModel):
    """Annealed (or posterior-mean) estimate with its provenance."""
    kind: str
    names: List[str]
    beta: List[float]
    beta_raw: List[float]
    nu: Optional[float] = None
    nu_fixed: bool
    schedule: str
    log_power_posterior: Optional[float] = None
    column_scales: List[float]
    intercept: bool
    stages: List[StageRecord] = Field(default_factory=list)


class TraceDiagnostics(BaseModel):
    """ESS and moments of a stored trace."""
    names: List[str]
    samples: int
    mean: List[float]
    sd: List[float]
    ess: List[float]
    degenerate: List[bool]
    ess_nu: float


class PredictionMetrics(BaseModel):
    rows: int
    misclassification: float
    expected_log_likelihood: Optional[float] = None


class RunManifest(BaseModel):
    """Everything needed to rerun a command.

    Attributes:
        command (str): CLI command that produced the outputs.
        config (Dict[str, Any]): Parsed flags, replayable as they are.
        dataset (Dict[str, Any]): Dataset fingerprint.
        seed (int): Root seed.
        threads (int): Worker threads used.
        versions (Dict[str, str]): Interpreter and library versions.
        started_at (datetime): Start time.
        wall_time (float): Seconds spent.
        outputs (Dict[str, str]): Paths of the written artifacts.
    """
    command: str
    config: Dict[str, Any]
    dataset: Dict[str, Any] = Field(default_factory=dict)
    seed: int
    threads: int
    versions: Dict[str, str] = Field(default_factory=dict)
    started_at: datetime
    wall_time: float = 0.0
    outputs: Dict[str, str] = Field(default_factory=dict)


class ExperimentReport(BaseModel):
    """Result of one built-in experiment."""
    name: str
    seed: int
    results: Dict[str, Any]
