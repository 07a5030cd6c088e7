"""Re-derive a report's verdicts and holdings from its own records."""

from __future__ import annotations

import logging
from collections import defaultdict

from ..models import DocumentHeader, DocumentId, PlayerId
from ..protocols.service import loyalty_check
from ..registry import Registry, RegistryError
from .schemas import Report

logger = logging.getLogger(__name__)


def catalogue_of(report: Report) -> list[DocumentHeader]:
    """Headers of every authored document, taken from the event log."""

    return [event.header for event in report.events if event.kind == "authored" and event.header is not None]


def replay_report(report: Report) -> list[str]:
    """Recompute each check's verdicts from the registry log and recorded disclosures.

    Returns one line per mismatch; an empty list means the report reproduces.
    """

    try:
        registry = Registry.restore(report.registry, catalogue_of(report))
    except RegistryError as exc:
        return [f"registry log: {exc}"]

    players = range(len(report.header.scenario.players))
    mismatches: list[str] = []
    for check in report.checks:
        stale = [d.player for d in check.disclosures if d.round != check.round]
        if stale:
            mismatches.append(f"check at round {check.round}: disclosures from other rounds {stale}")
        recomputed = loyalty_check(check.disclosures, registry, players, check.round)
        differing = [
            verdict.player for verdict, recorded in zip(recomputed, check.verdicts) if verdict != recorded
        ]
        if len(recomputed) != len(check.verdicts) or differing:
            mismatches.append(f"check at round {check.round}: verdicts differ for players {differing}")
        logger.debug(
            "check replayed",
            extra={"ctx_round": check.round, "ctx_differing": len(differing)},
        )
    return mismatches


def check_conservation(report: Report) -> list[str]:
    """Trace every recorded holding back to one authoring event through the event log."""

    problems: list[str] = []
    authored: dict[DocumentId, PlayerId] = {}
    holdings: dict[PlayerId, set[DocumentId]] = defaultdict(set)
    events = iter(report.events)
    pending = next(events, None)

    for check in report.checks:
        while pending is not None and pending.round <= check.round:
            event = pending
            pending = next(events, None)
            if event.kind == "authored":
                if event.doc_id in authored:
                    problems.append(f"{event.doc_id} authored twice")
                authored[event.doc_id] = event.actor
                holdings[event.actor].add(event.doc_id)
                continue
            if event.doc_id not in authored:
                problems.append(f"round {event.round}: {event.doc_id} moved before it was authored")
            if event.doc_id not in holdings[event.actor]:
                problems.append(f"round {event.round}: player {event.actor} passed {event.doc_id} it never held")
            if event.receiver is not None:
                holdings[event.receiver].add(event.doc_id)

        for truth in check.truth:
            recorded = set(truth.created) | {holding.doc_id for holding in truth.transferred}
            if recorded != holdings[truth.player]:
                problems.append(
                    f"check at round {check.round}: player {truth.player} holds "
                    f"{sorted(recorded)} but the event log gives {sorted(holdings[truth.player])}"
                )
    return problems
