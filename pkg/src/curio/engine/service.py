"""Deterministic round-synchronous simulation.

Each round every player's step function sees the same round-start snapshot;
the resulting actions then execute in player-id order. Loyalty checks run
after the round's actions whenever ``(round + 1) % check_every == 0`` and
after the final round.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

from .. import tool_version
from ..adversary.schemas import (
    Action,
    AuthorAction,
    DenyAction,
    DirectoryEntry,
    ExchangeAction,
    GrantAction,
    HoldingView,
    ObservableState,
    PendingRequest,
    RequestAction,
    RetainAction,
    ScheduledDocument,
)
from ..adversary.service import step
from ..crypto import derive_signing_key, sign
from ..errors import ClearanceViolation, CurioError
from ..models import (
    BehaviorTag,
    Channel,
    Document,
    DocumentId,
    HeldItem,
    InformationSet,
    Player,
    PlayerId,
    SealedEnvelope,
    Signature,
    SigningKey,
    TransferProtocol,
    dominates,
    new_document,
)
from ..protocols.schemas import TransferRequest
from ..protocols.service import (
    ProtocolError,
    detection_sweep,
    inter_clearance_transfer,
    intra_clearance_transfer,
)
from ..registry import Registry
from ..streams import stream
from . import topology
from .schemas import (
    CheckRecord,
    GroundTruth,
    HoldingRecord,
    Metrics,
    PlayerTruth,
    Report,
    ReportHeader,
    Scenario,
    ScenarioIssue,
    SimEvent,
)

logger = logging.getLogger(__name__)

CONTENT_SIZE = 32


class InvalidScenario(CurioError):
    """Raised when a scenario breaks an invariant; carries field-level issues."""

    def __init__(self, issues: Sequence[ScenarioIssue]) -> None:
        self.issues = list(issues)
        super().__init__("; ".join(f"{issue.field}: {issue.message}" for issue in self.issues))


def validate_scenario(scenario: Scenario) -> list[ScenarioIssue]:
    """Invariants that span fields; per-field constraints live on the schema."""

    issues: list[ScenarioIssue] = []
    count = len(scenario.players)
    known = range(count)

    if scenario.topology is not None:
        stray = sorted(
            {pid for pid in scenario.topology if pid not in known}
            | {pid for linked in scenario.topology.values() for pid in linked if pid not in known}
        )
        if stray:
            issues.append(ScenarioIssue(field="topology", message=f"unknown players {stray}"))
        elif not topology.is_connected(topology.normalize(scenario.topology, count)):
            issues.append(ScenarioIssue(field="topology", message="topology is not connected"))

    for pid, spec in enumerate(scenario.players):
        partners = spec.behavior.params.partners
        if any(partner not in known or partner == pid for partner in partners):
            issues.append(
                ScenarioIssue(
                    field=f"players.{pid}.behavior.params.partners",
                    message=f"partners {list(partners)} must name other scenario players",
                )
            )

    for position, entry in enumerate(scenario.authoring_schedule):
        prefix = f"authoring_schedule.{position}"
        if entry.player not in known:
            issues.append(ScenarioIssue(field=f"{prefix}.player", message=f"unknown player {entry.player}"))
            continue
        if entry.round >= scenario.rounds:
            issues.append(ScenarioIssue(field=f"{prefix}.round", message="round is past the end of the run"))
        if any(pid not in known for pid in entry.need_to_know):
            issues.append(ScenarioIssue(field=f"{prefix}.need_to_know", message="unknown player in need_to_know"))
        if not dominates(scenario.players[entry.player].clearance, entry.level):
            issues.append(
                ScenarioIssue(field=f"{prefix}.level", message="author is not cleared for this level")
            )

    if 3 * scenario.assumed_m + 1 > count + 1:
        issues.append(
            ScenarioIssue(
                field="assumed_m",
                message=f"agreement among {count + 1} participants tolerates fewer than {scenario.assumed_m} traitors",
            )
        )
    return issues


@dataclass
class _Request:
    requester: PlayerId
    holder: PlayerId
    doc_id: DocumentId
    round: int


class Simulation:
    """Mutable state of one run; :meth:`run` drives it to a :class:`Report`."""

    def __init__(self, scenario: Scenario, *, redact_inter_clearance: bool = False) -> None:
        issues = validate_scenario(scenario)
        if issues:
            raise InvalidScenario(issues)
        self.scenario = scenario
        self.redact_inter_clearance = redact_inter_clearance
        self.registry = Registry()
        self.players: dict[PlayerId, Player] = {
            pid: Player(
                id=pid,
                clearance=spec.clearance,
                behavior=spec.behavior,
                trust=spec.trust,
                key=derive_signing_key(scenario.seed, pid),
                info=InformationSet(owner=pid),
            )
            for pid, spec in enumerate(scenario.players)
        }
        if scenario.topology is None:
            self.adjacency = topology.default_topology([spec.clearance for spec in scenario.players])
        else:
            self.adjacency = topology.normalize(scenario.topology, len(scenario.players))

        self.events: list[SimEvent] = []
        self.checks: list[CheckRecord] = []
        self._signatures: dict[tuple[DocumentId, PlayerId], Signature] = {}
        self._requests: list[_Request] = []
        # requester -> (doc, holder, round the denial becomes visible)
        self._denials: dict[PlayerId, list[tuple[DocumentId, PlayerId, int]]] = defaultdict(list)
        self._deliveries: dict[int, list[SealedEnvelope]] = defaultdict(list)
        self._truth = GroundTruth(tags={pid: spec.behavior.tag for pid, spec in enumerate(scenario.players)})

    # signing

    def sign(self, document: Document, key: SigningKey) -> Signature:
        """Memoized signer; signatures are fixed at authoring time."""

        cached = self._signatures.get((document.id, key.key_id))
        if cached is None:
            cached = sign(document, key)
            self._signatures[(document.id, key.key_id)] = cached
        return cached

    # snapshot

    def observe(self, pid: PlayerId, round: int) -> ObservableState:
        player = self.players[pid]
        neighbours = self.adjacency[pid]
        watched = {pid, *neighbours}
        partners = player.behavior.params.partners
        return ObservableState(
            player=pid,
            clearance=player.clearance,
            behavior=player.behavior,
            trust=player.trust,
            round=round,
            neighbors=neighbours,
            roster={other.id: other.clearance for other in self.players.values()},
            holdings=tuple(self._holdings(player)),
            directory=tuple(
                DirectoryEntry(holder=neighbour, header=holding.header)
                for neighbour in neighbours
                for holding in self._holdings(self.players[neighbour])
                if holding.full
            ),
            partner_holdings={
                partner: frozenset(holding.header.id for holding in self._holdings(self.players[partner]))
                for partner in partners
            },
            inbox=tuple(
                PendingRequest(
                    requester=request.requester,
                    requester_clearance=self.players[request.requester].clearance,
                    holder=request.holder,
                    doc_id=request.doc_id,
                    round=request.round,
                )
                for request in self._requests
                if request.holder == pid and request.round == round - 1
            ),
            outstanding=frozenset(
                request.doc_id
                for request in self._requests
                if request.requester == pid and request.round == round - 1
            ),
            denials=frozenset(
                (doc_id, holder) for doc_id, holder, visible in self._denials[pid] if visible <= round
            ),
            observed=tuple(
                envelope
                for envelope in self._deliveries.get(round - 1, [])
                if envelope.recipient in watched or envelope.sender in watched
            ),
            schedule=tuple(
                ScheduledDocument(level=entry.level, need_to_know=entry.need_to_know)
                for entry in self.scenario.authoring_schedule
                if entry.round == round and entry.player == pid
            ),
        )

    @staticmethod
    def _holdings(player: Player) -> Iterable[HoldingView]:
        for document in player.info.created.values():
            yield HoldingView(header=document.header(), full=True)
        for item in player.info.transferred.values():
            yield HoldingView(header=item.header, full=item.document is not None, channel=item.channel)

    # execution

    def execute(self, pid: PlayerId, action: Action, round: int) -> None:
        if isinstance(action, AuthorAction):
            self._author(pid, action, round)
        elif isinstance(action, RequestAction):
            if action.holder == pid or action.holder not in self.players:
                logger.debug("request ignored", extra={"ctx_player": pid, "ctx_holder": action.holder})
                return
            self._requests.append(_Request(pid, action.holder, action.doc_id, round))
        elif isinstance(action, GrantAction):
            if self._answers_request(action.requester, pid, action.doc_id, round):
                self._transfer(pid, action.requester, action.doc_id, "requested", round)
        elif isinstance(action, DenyAction):
            if self._answers_request(action.requester, pid, action.doc_id, round):
                self._denials[action.requester].append((action.doc_id, pid, round + 1))
                self._truth.denied_requests += 1
        elif isinstance(action, ExchangeAction):
            self._exchange(pid, action.partner, action.doc_id, round)
        elif isinstance(action, RetainAction):
            self.players[pid].message_store.extend(action.envelopes)

    def _answers_request(self, requester: PlayerId, holder: PlayerId, doc_id: DocumentId, round: int) -> bool:
        return any(
            request.requester == requester
            and request.holder == holder
            and request.doc_id == doc_id
            and request.round == round - 1
            for request in self._requests
        )

    def _author(self, pid: PlayerId, action: AuthorAction, round: int) -> None:
        player = self.players[pid]
        content = stream(self.scenario.seed, "content", pid, player.doc_counter).randbytes(CONTENT_SIZE)
        document = new_document(player, content, action.level, action.need_to_know)
        self.registry.catalogue_document(document.header())
        for other in self.players.values():
            self.sign(document, other.key)
        self.events.append(
            SimEvent(round=round, kind="authored", doc_id=document.id, actor=pid, header=document.header())
        )
        for receiver in action.share_with:
            self._transfer(pid, receiver, document.id, "need-to-know", round)

    def _transfer(
        self, sender_id: PlayerId, receiver_id: PlayerId, doc_id: DocumentId, justification: str, round: int
    ) -> None:
        sender, receiver = self.players[sender_id], self.players[receiver_id]
        if receiver.info.holds(doc_id):
            return
        inter = sender.clearance != receiver.clearance
        protocol = TransferProtocol.INTER if inter else TransferProtocol.INTRA
        request = TransferRequest(
            sender=sender_id, receiver=receiver_id, doc_id=doc_id, pretext=justification, protocol=protocol
        )
        run_protocol = inter_clearance_transfer if inter else intra_clearance_transfer
        try:
            delivery = run_protocol(
                request,
                round,
                players=self.players,
                registry=self.registry,
                signer=self.sign,
                register_send=not sender.behavior.params.skip_registration,
                register_receive=not receiver.behavior.params.skip_registration,
            )
        except (ClearanceViolation, ProtocolError) as exc:
            logger.info(
                "transfer refused",
                extra={"ctx_doc": doc_id, "ctx_sender": sender_id, "ctx_receiver": receiver_id, "ctx_reason": str(exc)},
            )
            return

        self._deliveries[round].append(delivery.envelope)
        self._truth.transfers += 1
        self.events.append(
            SimEvent(
                round=round,
                kind="transfer",
                doc_id=doc_id,
                actor=sender_id,
                receiver=receiver_id,
                protocol=protocol,
                full=not inter,
            )
        )
        self._note_acquisition(receiver, doc_id, round)
        if inter and self.redact_inter_clearance:
            document = sender.info.full_document(doc_id)
            if document is not None:
                redacted = document.redacted()
                for player in self.players.values():
                    player.info.replace_document(redacted)

    def _exchange(self, sender_id: PlayerId, partner_id: PlayerId, doc_id: DocumentId, round: int) -> None:
        sender, partner = self.players[sender_id], self.players[partner_id]
        document = sender.info.full_document(doc_id)
        if document is None or partner.info.holds(doc_id) or document.origin == partner_id:
            return
        partner.info.add_transferred(
            HeldItem(
                signature=self.sign(document, sender.key),
                header=document.header(),
                document=document,
                channel=Channel.EXCHANGE,
                sender=sender_id,
                round=round,
            )
        )
        sender.off_book.add(doc_id)
        partner.off_book.add(doc_id)
        self._truth.exchanges += 1
        self.events.append(
            SimEvent(round=round, kind="exchange", doc_id=doc_id, actor=sender_id, receiver=partner_id)
        )
        self._note_acquisition(partner, doc_id, round)

    def _note_acquisition(self, receiver: Player, doc_id: DocumentId, round: int) -> None:
        header = self.registry.catalogue.get(doc_id)
        if header is not None and receiver.id not in header.need_to_know:
            self._truth.first_acquisition.setdefault(receiver.id, round)

    # checks

    def _check(self, round: int) -> None:
        sweep = detection_sweep(
            self.players,
            self.registry,
            round,
            assumed_m=self.scenario.assumed_m,
            traitor_strategy=self.scenario.ba_traitor_strategy,
            signer=self.sign,
        )
        self.checks.append(
            CheckRecord(
                round=round,
                disclosures=sweep.disclosures,
                verdicts=sweep.verdicts,
                ratified=sweep.ratified,
                agreement=sweep.agreement,
                ba_messages=sweep.ba_messages,
                bound_exceeded=sweep.bound_exceeded,
                assumptions_hold=sweep.assumptions_hold,
                truth=self.truth_snapshot(),
            )
        )

    def truth_snapshot(self) -> list[PlayerTruth]:
        return [
            PlayerTruth(
                player=player.id,
                tag=player.behavior.tag,
                created=sorted(player.info.created),
                transferred=sorted(
                    (
                        HoldingRecord(
                            doc_id=item.header.id,
                            channel=item.channel,
                            sender=item.sender,
                            round=item.round,
                            full=item.document is not None,
                            in_need_to_know=player.id in item.header.need_to_know,
                        )
                        for item in player.info.transferred.values()
                    ),
                    key=lambda record: (record.doc_id, record.sender),
                ),
                retained_envelopes=len(player.message_store),
            )
            for player in sorted(self.players.values(), key=lambda player: player.id)
        ]

    def is_check_round(self, round: int) -> bool:
        return (round + 1) % self.scenario.check_every == 0 or round == self.scenario.rounds - 1

    def run(self) -> Report:
        seed = self.scenario.seed
        for round in range(self.scenario.rounds):
            views = {pid: self.observe(pid, round) for pid in sorted(self.players)}
            planned = {pid: step(view, round, seed) for pid, view in views.items()}
            for pid, actions in planned.items():
                for action in actions:
                    self.execute(pid, action, round)
            if self.is_check_round(round):
                self._check(round)

        self._truth.out_of_ntk_held = sum(
            1
            for player in self.players.values()
            for item in player.info.transferred.values()
            if player.id not in item.header.need_to_know
        )
        metrics = metrics_from(self.checks, self._truth)
        logger.info(
            "simulation finished",
            extra={
                "ctx_rounds": self.scenario.rounds,
                "ctx_checks": len(self.checks),
                "ctx_true_positives": metrics.true_positives,
                "ctx_false_positives": metrics.false_positives,
            },
        )
        return Report(
            header=ReportHeader(
                tool_version=tool_version(),
                seed=seed,
                redacted=self.redact_inter_clearance,
                scenario=self.scenario,
            ),
            events=self.events,
            registry=list(self.registry.entries),
            checks=self.checks,
            metrics=metrics,
            ground_truth=self._truth,
        )


def run(scenario: Scenario, *, redact_inter_clearance: bool = False) -> Report:
    """Execute a scenario from round 0 to its last round."""

    return Simulation(scenario, redact_inter_clearance=redact_inter_clearance).run()


def _flagged_rounds(checks: Sequence[CheckRecord]) -> dict[PlayerId, list[int]]:
    flagged: dict[PlayerId, list[int]] = defaultdict(list)
    for check in checks:
        for verdict in check.ratified:
            if verdict.curious:
                flagged[verdict.player].append(check.round)
    return flagged


def metrics_from(checks: Sequence[CheckRecord], ground_truth: GroundTruth) -> Metrics:
    """Score the ratified verdicts against the behaviour tags."""

    flagged = _flagged_rounds(checks)
    positives = {pid for pid, tag in ground_truth.tags.items() if tag is not BehaviorTag.LOYAL}
    detected = positives & flagged.keys()

    rounds_to_detection: dict[PlayerId, int] = {}
    for pid in sorted(detected):
        acquired = ground_truth.first_acquisition.get(pid)
        if acquired is None:
            continue
        later = [round for round in flagged[pid] if round >= acquired]
        if later:
            rounds_to_detection[pid] = later[0] - acquired

    return Metrics(
        true_positives=len(detected),
        false_positives=len(flagged.keys() - positives),
        false_negatives=len(positives - detected),
        rounds_to_detection=rounds_to_detection,
        ba_messages=sum(check.ba_messages for check in checks),
        transfers=ground_truth.transfers,
        exchanges=ground_truth.exchanges,
        denied_requests=ground_truth.denied_requests,
        out_of_ntk_held=ground_truth.out_of_ntk_held,
        agreement_failures=sum(not check.agreement for check in checks),
        bound_exceeded_checks=sum(check.bound_exceeded for check in checks),
    )
