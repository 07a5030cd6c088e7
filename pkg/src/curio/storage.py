"""Scenario and report files.

Scenarios are JSON documents. Reports are JSON Lines: one ``header``
record, then per loyalty check the ``event`` and ``registry`` records it
covers followed by the ``check`` record, and finally ``metrics`` and
``ground_truth``. Cutting a report after any ``check`` line leaves a
prefix that still parses.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Iterable, Iterator

from pydantic import BaseModel, ValidationError

from .config import get_settings, resolve_path
from .engine.schemas import (
    CheckRecord,
    GroundTruth,
    Metrics,
    PropertyReport,
    Report,
    ReportHeader,
    Scenario,
    ScenarioIssue,
    SimEvent,
)
from .engine.service import InvalidScenario, validate_scenario
from .errors import CurioError
from .registry.schemas import RegistryEntry

logger = logging.getLogger(__name__)


class ScenarioParseError(CurioError):
    """Raised when a file is not well-formed JSON; carries the position."""

    def __init__(self, message: str, line: int, column: int) -> None:
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class ReportParseError(CurioError):
    """Raised when a report line is not a known record."""


def _canonical(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def _with_defaults(raw: Any) -> Any:
    if not isinstance(raw, dict):
        return raw
    settings = get_settings()
    filled = dict(raw)
    filled.setdefault("check_every", settings.default_check_every)
    players = filled.get("players")
    if isinstance(players, list):
        filled["players"] = [_player_defaults(player, settings.default_grant_probability) for player in players]
    return filled


def _player_defaults(player: Any, grant_probability: float) -> Any:
    if not isinstance(player, dict):
        return player
    trust = player.get("trust", {})
    if not isinstance(trust, dict):
        return player
    return {**player, "trust": {"grant_probability": grant_probability, **trust}}


def _issues(exc: ValidationError) -> list[ScenarioIssue]:
    return [
        ScenarioIssue(field=".".join(str(part) for part in error["loc"]) or "scenario", message=error["msg"])
        for error in exc.errors()
    ]


def parse_scenario(text: str) -> Scenario:
    """Parse and invariant-check scenario JSON; unknown fields are rejected."""

    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(exc.msg, exc.lineno, exc.colno) from exc
    try:
        scenario = Scenario.model_validate(_with_defaults(raw))
    except ValidationError as exc:
        raise InvalidScenario(_issues(exc)) from exc
    issues = validate_scenario(scenario)
    if issues:
        raise InvalidScenario(issues)
    return scenario


def load_scenario(path: Path) -> Scenario:
    scenario = parse_scenario(resolve_path(path).read_text(encoding="utf-8"))
    logger.info(
        "scenario loaded",
        extra={"ctx_path": str(path), "ctx_players": len(scenario.players), "ctx_rounds": scenario.rounds},
    )
    return scenario


def dump_scenario(scenario: Scenario) -> str:
    return json.dumps(scenario.model_dump(mode="json"), indent=2, sort_keys=True) + "\n"


def _record(kind: str, model: BaseModel) -> str:
    return _canonical({"record": kind, "data": model.model_dump(mode="json")})


def report_lines(report: Report) -> Iterator[str]:
    """Serialize a report as JSON Lines in check order."""

    yield _record("header", report.header)
    events = list(report.events)
    entries = list(report.registry)
    for check in report.checks:
        while events and events[0].round <= check.round:
            yield _record("event", events.pop(0))
        while entries and entries[0].round <= check.round:
            yield _record("registry", entries.pop(0))
        yield _record("check", check)
    for event in events:
        yield _record("event", event)
    for entry in entries:
        yield _record("registry", entry)
    if report.metrics is not None:
        yield _record("metrics", report.metrics)
    if report.ground_truth is not None:
        yield _record("ground_truth", report.ground_truth)


def write_report(report: Report, destination: Path) -> Path:
    target = resolve_path(destination)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", encoding="utf-8", newline="\n") as handle:
        for line in report_lines(report):
            handle.write(line + "\n")
    return target


def parse_report(lines: Iterable[str]) -> Report:
    """Rebuild a report from its lines; a torn final line is dropped."""

    records = [line for line in lines if line.strip()]
    header: ReportHeader | None = None
    events: list[SimEvent] = []
    registry: list[RegistryEntry] = []
    checks: list[CheckRecord] = []
    metrics: Metrics | None = None
    ground_truth: GroundTruth | None = None

    for number, line in enumerate(records, start=1):
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            if number == len(records):
                logger.warning("dropping torn final report line", extra={"ctx_line": number})
                break
            raise ReportParseError(f"line {number}: {exc.msg}") from exc
        if not isinstance(record, dict):
            raise ReportParseError(f"line {number}: expected an object")
        kind, data = record.get("record"), record.get("data")
        try:
            if kind == "header":
                header = ReportHeader.model_validate(data)
            elif kind == "event":
                events.append(SimEvent.model_validate(data))
            elif kind == "registry":
                registry.append(RegistryEntry.model_validate(data))
            elif kind == "check":
                checks.append(CheckRecord.model_validate(data))
            elif kind == "metrics":
                metrics = Metrics.model_validate(data)
            elif kind == "ground_truth":
                ground_truth = GroundTruth.model_validate(data)
            else:
                raise ReportParseError(f"line {number}: unknown record {kind!r}")
        except ValidationError as exc:
            raise ReportParseError(f"line {number}: invalid {kind} record: {exc}") from exc

    if header is None:
        raise ReportParseError("report has no header record")
    return Report(
        header=header,
        events=events,
        registry=registry,
        checks=checks,
        metrics=metrics,
        ground_truth=ground_truth,
    )


def read_report(path: Path) -> Report:
    with resolve_path(path).open(encoding="utf-8") as handle:
        return parse_report(handle)


def write_property_report(report: PropertyReport, destination: Path) -> Path:
    target = resolve_path(destination)
    target.parent.mkdir(parents=True, exist_ok=True)
    payload = {**report.model_dump(mode="json"), "ok": report.ok}
    target.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return target
