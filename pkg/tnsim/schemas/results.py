"""
Result records written by the experiment harness.

Every value carries the source of its error budget. The CSV header is
fixed for a schema version; floats are printed with 17 significant
digits so identical records give byte-identical files.
"""

from utils.compat import StrEnum
from typing import Any, Dict, Optional

from pydantic import BaseModel, ConfigDict, Field

RESULTS_SCHEMA_VERSION = 1

CSV_COLUMNS = (
    "schema_version",
    "experiment",
    "metric",
    "time",
    "value",
    "error_source",
    "epsilon",
    "delta_k",
    "discarded_weight",
    "converged",
    "wall_time",
    "params",
)


class ErrorSource(StrEnum):
    """Where the uncertainty of a value comes from."""

    EXACT = "exact"
    ORACLE = "oracle"
    VARIANCE = "variance"
    SWEEP = "sweep"
    DISCARDED_WEIGHT = "discarded_weight"
    DELTA_K = "delta_k"
    TROTTER = "trotter"
    FIT_DISTANCE = "fit_distance"
    FINITE_SIZE = "finite_size"
    WINDOW = "window"


class ResultRecord(BaseModel):
    """One metric of one experiment."""

    model_config = ConfigDict(extra="forbid")

    experiment: str = Field(..., description="Experiment label")
    params: Dict[str, Any] = Field(default_factory=dict, description="Echo of every parameter used")
    metric: str = Field(..., description="Metric name")
    time: Optional[float] = Field(None, description="Time of a trajectory row")
    value: float = Field(..., description="Metric value")
    error_source: ErrorSource = Field(..., description="Error budget the value is subject to")
    epsilon: Optional[float] = Field(None, description="Variance window width")
    delta_k: Optional[float] = Field(None, description="Largest boundary/fit compression error")
    discarded_weight: Optional[float] = Field(None, description="Sum of discarded Schmidt weights")
    converged: bool = Field(default=True, description="Whether the producing solver converged")
    wall_time: Optional[float] = Field(None, description="Seconds spent in the experiment")
    schema_version: int = Field(default=RESULTS_SCHEMA_VERSION)
