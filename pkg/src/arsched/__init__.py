"""Admission control and placement of advance-reservation jobs on a
homogeneous multiprocessor: availability calendar, placement policies,
synthetic workload generation, and a deterministic simulator."""

from .calendar import (
    Allocation,
    AllocationNotPresentError,
    AvailabilityCalendar,
    AvailabilityRectangle,
    CalendarError,
    ClusterConfig,
    EmptyWindowError,
    OPEN_END,
    OverlapError,
    SlotRecord,
)
from .engine import JobOutcome, SimulationInternalError, run
from .metrics import (
    RunRecord,
    RunSummary,
    SweepPoint,
    aggregate_sweep,
    confidence_interval,
    summarize,
)
from .policies import POLICY_ORDER, Policy, select
from .workload import ARRequest, ConfigError, WorkloadConfig, generate, ingest_swf

__version__ = "0.1.0"

__all__ = [
    "Allocation",
    "AllocationNotPresentError",
    "ARRequest",
    "AvailabilityCalendar",
    "AvailabilityRectangle",
    "CalendarError",
    "ClusterConfig",
    "ConfigError",
    "EmptyWindowError",
    "JobOutcome",
    "OPEN_END",
    "OverlapError",
    "POLICY_ORDER",
    "Policy",
    "RunRecord",
    "RunSummary",
    "SimulationInternalError",
    "SlotRecord",
    "SweepPoint",
    "WorkloadConfig",
    "aggregate_sweep",
    "confidence_interval",
    "generate",
    "ingest_swf",
    "run",
    "select",
    "summarize",
    "__version__",
]
