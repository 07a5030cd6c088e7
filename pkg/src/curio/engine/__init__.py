"""Round-synchronous simulation engine, verification and replay."""

from .replay import check_conservation, replay_report
from .schemas import (
    AuthoringEntry,
    CheckRecord,
    GroundTruth,
    Metrics,
    PlayerSpec,
    PropertyReport,
    PropertyViolation,
    Report,
    ReportHeader,
    Scenario,
    ScenarioIssue,
    SimEvent,
)
from .service import InvalidScenario, Simulation, metrics_from, run, validate_scenario
from .verify import exhaustive_verify

__all__ = [
    "AuthoringEntry",
    "CheckRecord",
    "GroundTruth",
    "InvalidScenario",
    "Metrics",
    "PlayerSpec",
    "PropertyReport",
    "PropertyViolation",
    "Report",
    "ReportHeader",
    "Scenario",
    "ScenarioIssue",
    "SimEvent",
    "Simulation",
    "check_conservation",
    "exhaustive_verify",
    "metrics_from",
    "replay_report",
    "run",
    "validate_scenario",
]
