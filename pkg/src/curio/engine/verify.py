"""Exhaustive verification of soundness and completeness over role assignments."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from itertools import combinations, product
from typing import Iterator

from ..models import BehaviorKind, BehaviorParams, BehaviorTag, PlayerId
from .replay import check_conservation, replay_report
from .schemas import PlayerSpec, PropertyReport, PropertyViolation, Report, Scenario
from .service import InvalidScenario, run, validate_scenario

logger = logging.getLogger(__name__)

MAX_PLAYERS = 10

CURIOUS_TAGS = (BehaviorTag.CURIOUS_OVERT, BehaviorTag.CURIOUS_CONCEALING)

Assignment = dict[PlayerId, BehaviorKind]


def truncate(template: Scenario, players: int) -> Scenario:
    """Keep the first ``players`` players and everything that only refers to them."""

    kept = range(min(players, len(template.players)))
    topology = None
    if template.topology is not None:
        topology = {
            pid: [other for other in linked if other in kept]
            for pid, linked in template.topology.items()
            if pid in kept
        }
    schedule = [
        entry.model_copy(update={"need_to_know": frozenset(pid for pid in entry.need_to_know if pid in kept)})
        for entry in template.authoring_schedule
        if entry.player in kept
    ]
    return template.model_copy(
        update={
            "players": template.players[: len(kept)],
            "topology": topology,
            "authoring_schedule": schedule,
        }
    )


def assignments(players: int, max_curious: int, *, include_traitors: bool = False) -> Iterator[Assignment]:
    """Every placement of up to ``max_curious`` curious roles, then traitor pairs."""

    positions = range(players)
    for count in range(max_curious + 1):
        for chosen in combinations(positions, count):
            for tags in product(CURIOUS_TAGS, repeat=count):
                yield {pid: BehaviorKind(tag=tag) for pid, tag in zip(chosen, tags)}
    if include_traitors:
        for first, second in combinations(positions, 2):
            yield {
                first: _traitor(second),
                second: _traitor(first),
            }


def _traitor(partner: PlayerId) -> BehaviorKind:
    return BehaviorKind(
        tag=BehaviorTag.TRAITOR_COLLUDING,
        params=BehaviorParams(partners=(partner,), request_rate=0),
    )


def _assign(template: Scenario, assignment: Assignment) -> Scenario:
    players = [
        PlayerSpec(clearance=spec.clearance, behavior=assignment.get(pid, BehaviorKind()), trust=spec.trust)
        for pid, spec in enumerate(template.players)
    ]
    return template.model_copy(update={"players": players, "assumed_m": len(assignment)})


def _admissible(players: int, adversaries: int) -> bool:
    loyal = players - adversaries
    return loyal > adversaries and 3 * adversaries + 1 <= players + 1


def check_assignment(job: tuple[int, Scenario, Assignment]) -> list[PropertyViolation]:
    """Run one assignment and report every property it breaks."""

    index, template, assignment = job
    scenario = _assign(template, assignment)
    report = run(scenario)
    tags = {pid: kind.tag for pid, kind in assignment.items()}
    truth = report.ground_truth
    if truth is None:
        return []

    violations = reproducibility_violations(index, tags, report, run(scenario, redact_inter_clearance=True))
    for check in report.checks:
        for verdict in check.ratified:
            if verdict.curious and verdict.player not in assignment:
                violations.append(
                    PropertyViolation(
                        index=index,
                        assignment=tags,
                        kind="soundness",
                        player=verdict.player,
                        round=check.round,
                        detail=f"loyal player flagged: {[e.kind.value for e in verdict.evidence]}",
                    )
                )

    for pid, kind in sorted(assignment.items()):
        acquired = truth.first_acquisition.get(pid)
        if acquired is None:
            continue
        first_check = next((check for check in report.checks if check.round >= acquired), None)
        flagged = first_check is not None and any(
            verdict.player == pid and verdict.curious for verdict in first_check.ratified
        )
        if not flagged:
            violations.append(
                PropertyViolation(
                    index=index,
                    assignment=tags,
                    kind="completeness",
                    player=pid,
                    round=None if first_check is None else first_check.round,
                    detail=f"acquired outside need-to-know at round {acquired} but not flagged",
                    boundary=kind.tag is BehaviorTag.TRAITOR_COLLUDING,
                )
            )
    return violations


def reproducibility_violations(
    index: int, tags: dict[PlayerId, BehaviorTag], report: Report, blind: Report
) -> list[PropertyViolation]:
    """Blind runs must ratify the same verdicts and the report must replay cleanly."""

    violations: list[PropertyViolation] = []
    for plain_check, blind_check in zip(report.checks, blind.checks):
        for ours, theirs in zip(plain_check.ratified, blind_check.ratified):
            if ours != theirs:
                violations.append(
                    PropertyViolation(
                        index=index,
                        assignment=tags,
                        kind="blind",
                        player=ours.player,
                        round=plain_check.round,
                        detail="verdict changes when contents are zeroed",
                    )
                )
    for problem in replay_report(report) + check_conservation(report):
        violations.append(PropertyViolation(index=index, assignment=tags, kind="replay", detail=problem))
    return violations


def exhaustive_verify(
    template: Scenario,
    max_players: int,
    max_curious: int,
    *,
    include_traitors: bool = False,
    workers: int = 1,
) -> PropertyReport:
    """Run every admissible role assignment over the template's first players.

    Assignments where loyal players would not strictly outnumber the others
    are skipped. Results are merged in enumeration order whatever the worker
    count.
    """

    if not 2 <= max_players <= MAX_PLAYERS:
        raise ValueError(f"max_players must be between 2 and {MAX_PLAYERS}")
    if max_curious < 0:
        raise ValueError("max_curious must be non-negative")
    base = truncate(template, max_players).model_copy(update={"assumed_m": 0})
    issues = validate_scenario(base)
    if issues:
        raise InvalidScenario(issues)
    count = len(base.players)

    jobs: list[tuple[int, Scenario, Assignment]] = []
    skipped = 0
    for index, assignment in enumerate(assignments(count, max_curious, include_traitors=include_traitors)):
        if _admissible(count, len(assignment)):
            jobs.append((index, base, assignment))
        else:
            skipped += 1

    logger.info(
        "verification started",
        extra={"ctx_players": count, "ctx_runs": len(jobs), "ctx_skipped": skipped, "ctx_workers": workers},
    )
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(check_assignment, jobs))
    else:
        results = [check_assignment(job) for job in jobs]

    violations = [violation for found in results for violation in found]
    for violation in violations:
        log = logger.info if violation.boundary else logger.warning
        log(
            "property violated",
            extra={"ctx_index": violation.index, "ctx_kind": violation.kind, "ctx_player": violation.player},
        )
    return PropertyReport(
        players=count,
        max_curious=max_curious,
        include_traitors=include_traitors,
        runs=len(jobs),
        skipped=skipped,
        violations=violations,
    )
