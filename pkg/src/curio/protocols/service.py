"""Transfer protocols and the loyalty check run by the grand designer."""

from __future__ import annotations

import logging
from typing import Callable, Iterable, Mapping, Sequence

from ..adversary.service import concealed
from ..byzantine.schemas import BATraitorStrategy
from ..byzantine.service import ratify_verdicts
from ..crypto import open_envelope, seal, sign
from ..errors import ClearanceViolation, CurioError
from ..models import (
    Channel,
    Document,
    HeldItem,
    Parcel,
    Player,
    PlayerId,
    Signature,
    SigningKey,
    TransferProtocol,
    dominates,
)
from ..registry import Registry, make_pretext
from .schemas import (
    Delivery,
    Disclosure,
    Evidence,
    EvidenceKind,
    Outcome,
    SweepResult,
    TransferRequest,
    Verdict,
)

logger = logging.getLogger(__name__)

Signer = Callable[[Document, SigningKey], Signature]


class ProtocolError(CurioError):
    """Base class for transfer protocol errors."""


class NotHolder(ProtocolError):
    """Raised when the sender does not hold the full document."""


class LevelMismatch(ProtocolError):
    """Raised when a protocol is used between the wrong pair of clearances."""


class AlreadyHeld(ProtocolError):
    """Raised when the receiver originated or already holds the document."""


class MissingDisclosure(ProtocolError):
    """Raised when a player handed nothing over at a loyalty check."""


def _prepare(
    req: TransferRequest, players: Mapping[PlayerId, Player], *, inter: bool
) -> tuple[Player, Player, Document]:
    sender, receiver = players[req.sender], players[req.receiver]
    expected = TransferProtocol.INTER if inter else TransferProtocol.INTRA
    if req.protocol is not expected:
        raise LevelMismatch(f"request names {req.protocol.value}, expected {expected.value}")
    if (sender.clearance != receiver.clearance) != inter:
        raise LevelMismatch(
            f"{expected.value} protocol between {sender.clearance.value} and {receiver.clearance.value}"
        )
    document = sender.info.full_document(req.doc_id)
    if document is None:
        raise NotHolder(f"player {sender.id} does not hold {req.doc_id}")
    if receiver.id == document.origin or receiver.info.holds(document.id):
        raise AlreadyHeld(f"player {receiver.id} already holds {document.id}")
    if not dominates(receiver.clearance, document.level):
        raise ClearanceViolation(
            f"{document.id} ({document.level.value}) cannot flow to player {receiver.id} "
            f"({receiver.clearance.value})"
        )
    return sender, receiver, document


def _deliver(
    req: TransferRequest,
    sender: Player,
    receiver: Player,
    document: Document,
    parcel_document: Document | None,
    round: int,
    registry: Registry,
    signer: Signer,
    register_send: bool,
    register_receive: bool,
) -> Delivery:
    # I catalogue, II sign
    header = document.header()
    registry.catalogue_document(header)
    signature = signer(document, sender.key)

    # III seal, IV transmit and register
    envelope = seal(
        Parcel(signature=signature, header=header, document=parcel_document),
        receiver.id,
        sender=sender.id,
    )
    send_index = None
    if register_send:
        send_index = registry.register_send(
            sender.id, receiver.id, signature, make_pretext(document.id, req.pretext), round, req.protocol
        )

    # V open and register receipt
    parcel = open_envelope(envelope, receiver.id)
    receiver.info.add_transferred(
        HeldItem(
            signature=parcel.signature,
            header=parcel.header,
            document=parcel.document,
            channel=Channel(req.protocol.value),
            sender=sender.id,
            round=round,
        )
    )
    receive_index = None
    if register_receive:
        receive_index = registry.register_receive(receiver.id, sender.id, parcel.signature, round, req.protocol)

    logger.debug(
        "transfer delivered",
        extra={
            "ctx_doc": document.id,
            "ctx_sender": sender.id,
            "ctx_receiver": receiver.id,
            "ctx_protocol": req.protocol.value,
            "ctx_round": round,
        },
    )
    return Delivery(
        envelope=envelope,
        signature=signature,
        protocol=req.protocol,
        send_index=send_index,
        receive_index=receive_index,
    )


def inter_clearance_transfer(
    req: TransferRequest,
    round: int,
    *,
    players: Mapping[PlayerId, Player],
    registry: Registry,
    signer: Signer = sign,
    register_send: bool = True,
    register_receive: bool = True,
) -> Delivery:
    """Pass a document upwards; the receiver keeps only its signature."""

    sender, receiver, document = _prepare(req, players, inter=True)
    return _deliver(
        req, sender, receiver, document, None, round, registry, signer, register_send, register_receive
    )


def intra_clearance_transfer(
    req: TransferRequest,
    round: int,
    *,
    players: Mapping[PlayerId, Player],
    registry: Registry,
    signer: Signer = sign,
    register_send: bool = True,
    register_receive: bool = True,
) -> Delivery:
    """Pass a full document between two players of the same clearance."""

    sender, receiver, document = _prepare(req, players, inter=False)
    return _deliver(
        req, sender, receiver, document, document, round, registry, signer, register_send, register_receive
    )


def disclose(player: Player, round: int, signer: Signer = sign) -> Disclosure:
    """The player's information sets as its behaviour chooses to reveal them."""

    hidden = concealed(player)
    created = frozenset(signer(document, player.key) for document in player.info.created.values())
    transferred = frozenset(
        item.signature for item in player.info.transferred.values() if item.signature.digest not in hidden
    )
    return Disclosure(player=player.id, round=round, created_sigs=created, transferred_sigs=transferred)


def collect_disclosures(
    players: Mapping[PlayerId, Player], round: int, signer: Signer = sign
) -> list[Disclosure]:
    """Gather every disclosure of one check, in player-id order."""

    disclosures = []
    for pid in sorted(players):
        player = players[pid]
        if player.behavior.params.withhold_disclosure:
            logger.info("player withheld its disclosure", extra={"ctx_player": pid, "ctx_round": round})
            continue
        disclosures.append(disclose(player, round, signer))
    return disclosures


def _judge(disclosure: Disclosure, registry: Registry, round: int) -> list[Evidence]:
    player = disclosure.player
    expected = {sig.digest: sig for sig in registry.expected_transferred_set(player, round)}
    disclosed = {sig.digest: sig for sig in disclosure.transferred_sigs}

    evidence: list[tuple[bytes, int, Evidence]] = []
    for digest in expected.keys() - disclosed.keys():
        evidence.append(
            (
                digest,
                0,
                Evidence(
                    kind=EvidenceKind.UNDISCLOSED_HOLDING,
                    sig=expected[digest],
                    detail=f"registered transfer of {expected[digest].doc_id} not disclosed",
                ),
            )
        )
    for digest in disclosed.keys() - expected.keys():
        evidence.append(
            (
                digest,
                1,
                Evidence(
                    kind=EvidenceKind.UNREGISTERED_HOLDING,
                    sig=disclosed[digest],
                    detail="disclosed holding has no registered transfer",
                ),
            )
        )
    for digest, sig in (expected | disclosed).items():
        header = registry.resolve(sig, round)
        if header is not None and player not in header.need_to_know:
            evidence.append(
                (
                    digest,
                    2,
                    Evidence(
                        kind=EvidenceKind.NEED_TO_KNOW_VIOLATION,
                        sig=sig,
                        detail=f"holds {header.id} from player {sig.signer} outside need-to-know",
                    ),
                )
            )
    return [item for _, _, item in sorted(evidence, key=lambda entry: (entry[0], entry[1]))]


def _disclosure_of(by_player: Mapping[PlayerId, Disclosure], pid: PlayerId) -> Disclosure:
    try:
        return by_player[pid]
    except KeyError:
        raise MissingDisclosure(f"player {pid} made no disclosure") from None


def loyalty_check(
    disclosures: Sequence[Disclosure],
    registry: Registry,
    players: Iterable[PlayerId],
    round: int,
) -> list[Verdict]:
    """Compare each disclosure with the registry and judge every player.

    Only signatures are compared; document contents are never consulted.
    """

    by_player = {disclosure.player: disclosure for disclosure in disclosures}
    verdicts = []
    for pid in sorted(players):
        try:
            evidence = _judge(_disclosure_of(by_player, pid), registry, round)
        except MissingDisclosure as exc:
            evidence = [Evidence(kind=EvidenceKind.MISSING_DISCLOSURE, detail=str(exc))]
        verdicts.append(
            Verdict(
                player=pid,
                outcome=Outcome.CURIOUS if evidence else Outcome.LOYAL,
                evidence=tuple(evidence),
                round=round,
            )
        )
    return verdicts


def detection_sweep(
    players: Mapping[PlayerId, Player],
    registry: Registry,
    round: int,
    *,
    assumed_m: int,
    traitor_strategy: BATraitorStrategy = BATraitorStrategy.WHITEWASH,
    signer: Signer = sign,
) -> SweepResult:
    """Run one loyalty check end to end and ratify the verdicts by agreement.

    Every non-loyal player behaves as a traitor during ratification.
    """

    adversaries = [pid for pid, player in players.items() if not player.behavior.is_loyal]
    assumptions_hold = len(players) - len(adversaries) > len(adversaries)
    if not assumptions_hold:
        logger.warning(
            "loyal players do not outnumber the rest",
            extra={"ctx_round": round, "ctx_adversaries": len(adversaries), "ctx_players": len(players)},
        )

    disclosures = collect_disclosures(players, round, signer)
    verdicts = loyalty_check(disclosures, registry, players.keys(), round)
    ratification = ratify_verdicts(
        verdicts, players.keys(), assumed_m, traitors=adversaries, strategy=traitor_strategy
    )
    if ratification.bound_exceeded:
        logger.warning(
            "traitor count exceeds the agreement bound",
            extra={"ctx_round": round, "ctx_traitors": len(adversaries), "ctx_m": assumed_m},
        )
    logger.info(
        "loyalty check complete",
        extra={"ctx_round": round, "ctx_flagged": sum(verdict.curious for verdict in verdicts)},
    )
    return SweepResult(
        round=round,
        disclosures=disclosures,
        verdicts=verdicts,
        ratified=ratification.verdicts,
        agreement=ratification.agreed,
        ba_messages=ratification.messages,
        bound_exceeded=ratification.bound_exceeded,
        assumptions_hold=assumptions_hold,
    )
