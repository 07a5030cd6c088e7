"""Command-line entrypoint for the curio simulator."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Sequence

from . import tool_version
from .config import get_settings
from .engine import exhaustive_verify, replay_report, run as run_scenario
from .engine.replay import check_conservation
from .engine.service import InvalidScenario
from .storage import (
    ReportParseError,
    ScenarioParseError,
    load_scenario,
    read_report,
    write_property_report,
    write_report,
)

logger = logging.getLogger("curio")

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INVALID = 2

U64_MAX = 2**64 - 1


class JsonFormatter(logging.Formatter):
    """Minimal JSON log formatter for structured logging."""

    def format(self, record: logging.LogRecord) -> str:  # noqa: D401 - inherited docstring
        log_payload: dict[str, Any] = {
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "time": self.formatTime(record, datefmt="%Y-%m-%dT%H:%M:%S%z"),
        }
        if record.exc_info:
            log_payload["exc_info"] = self.formatException(record.exc_info)
        for key, value in getattr(record, "__dict__", {}).items():
            if key.startswith("ctx_"):
                log_payload[key.removeprefix("ctx_")] = value
        return json.dumps(log_payload, default=str)


def configure_logging(level: str = "INFO", json_output: bool = True) -> None:
    """Attach a formatter writing to stderr to the root logger once."""

    root_logger = logging.getLogger()
    root_logger.setLevel(level)
    if any(getattr(handler, "_curio", False) for handler in root_logger.handlers):
        return

    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(JsonFormatter() if json_output else logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    setattr(handler, "_curio", True)
    root_logger.addHandler(handler)


def _u64(value: str) -> int:
    try:
        seed = int(value, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {value!r}") from None
    if not 0 <= seed <= U64_MAX:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return seed


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="curio", description="Curious-player detection simulator")
    parser.add_argument("--version", action="version", version=f"%(prog)s {tool_version()}")
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"], default=None)
    commands = parser.add_subparsers(dest="command", required=True)

    run_cmd = commands.add_parser("run", help="simulate a scenario and write a report")
    run_cmd.add_argument("--scenario", type=Path, required=True)
    run_cmd.add_argument("--seed", type=_u64, default=None)
    run_cmd.add_argument("--out", type=Path, required=True)
    run_cmd.add_argument(
        "--blind", action="store_true", help="zero document contents once they cross clearance levels"
    )

    verify_cmd = commands.add_parser("verify", help="check soundness and completeness over role assignments")
    verify_cmd.add_argument("--template", type=Path, required=True)
    verify_cmd.add_argument("--max-players", type=int, required=True)
    verify_cmd.add_argument("--max-curious", type=int, required=True)
    verify_cmd.add_argument("--out", type=Path, required=True)
    verify_cmd.add_argument("--include-traitors", action="store_true")
    verify_cmd.add_argument("--workers", type=int, default=None)

    validate_cmd = commands.add_parser("validate", help="parse and check a scenario")
    validate_cmd.add_argument("--scenario", type=Path, required=True)

    replay_cmd = commands.add_parser("replay", help="recompute a report's verdicts from its registry log")
    replay_cmd.add_argument("--report", type=Path, required=True)
    return parser


def _run(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    seed = args.seed if args.seed is not None else get_settings().seed
    if seed is not None:
        scenario = scenario.model_copy(update={"seed": seed})
    report = run_scenario(scenario, redact_inter_clearance=args.blind)
    write_report(report, args.out)
    metrics = report.metrics
    if metrics is not None:
        print(
            f"checks={len(report.checks)} tp={metrics.true_positives} fp={metrics.false_positives} "
            f"fn={metrics.false_negatives} transfers={metrics.transfers} ba_messages={metrics.ba_messages}"
        )
    return EXIT_OK


def _verify(args: argparse.Namespace) -> int:
    template = load_scenario(args.template)
    workers = args.workers if args.workers is not None else get_settings().verify_workers
    try:
        result = exhaustive_verify(
            template,
            args.max_players,
            args.max_curious,
            include_traitors=args.include_traitors,
            workers=workers,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    write_property_report(result, args.out)
    print(f"runs={result.runs} skipped={result.skipped} violations={len(result.violations)}")
    return EXIT_OK if result.ok else EXIT_VIOLATION


def _validate(args: argparse.Namespace) -> int:
    load_scenario(args.scenario)
    print("OK")
    return EXIT_OK


def _replay(args: argparse.Namespace) -> int:
    report = read_report(args.report)
    problems = replay_report(report) + check_conservation(report)
    for problem in problems:
        print(problem, file=sys.stderr)
    if problems:
        return EXIT_VIOLATION
    print(f"OK checks={len(report.checks)}")
    return EXIT_OK


COMMANDS = {"run": _run, "verify": _verify, "validate": _validate, "replay": _replay}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INVALID

    settings = get_settings()
    configure_logging(args.log_level or settings.log_level, settings.log_json)
    try:
        return COMMANDS[args.command](args)
    except ScenarioParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except InvalidScenario as exc:
        for issue in exc.issues:
            print(f"error: {issue.field}: {issue.message}", file=sys.stderr)
    except ReportParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_INVALID


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    run()
