from __future__ import annotations

import pytest

from curio.byzantine import BATraitorStrategy
from curio.crypto import sign
from curio.errors import ClearanceViolation
from curio.models import (
    BehaviorKind,
    BehaviorParams,
    BehaviorTag,
    Channel,
    ClearanceLevel,
    HeldItem,
    TransferProtocol,
    new_document,
)
from curio.protocols import Disclosure, EvidenceKind, Outcome, TransferRequest
from curio.protocols.service import (
    AlreadyHeld,
    LevelMismatch,
    NotHolder,
    collect_disclosures,
    detection_sweep,
    inter_clearance_transfer,
    intra_clearance_transfer,
    loyalty_check,
)
from curio.registry import EntryKind, Registry

C, S, T = ClearanceLevel.CONFIDENTIAL, ClearanceLevel.SECRET, ClearanceLevel.TOP_SECRET


def _network(make_player, clearances, behaviors=None):
    behaviors = behaviors or {}
    return {
        pid: make_player(pid, clearance, behaviors.get(pid))
        for pid, clearance in enumerate(clearances)
    }


def _request(sender, receiver, doc_id, protocol, pretext="share"):
    return TransferRequest(sender=sender, receiver=receiver, doc_id=doc_id, pretext=pretext, protocol=protocol)


def test_inter_transfer_registers_both_halves_and_hands_over_signature_only(make_player) -> None:
    players = _network(make_player, [C, S])
    registry = Registry()
    document = new_document(players[0], b"memo", C, [1])

    delivery = inter_clearance_transfer(
        _request(0, 1, document.id, TransferProtocol.INTER), 3, players=players, registry=registry
    )

    assert [entry.kind for entry in registry.entries] == [EntryKind.SEND, EntryKind.RECEIVE]
    assert registry.entries[0].pretext == f"{document.id} share"
    assert (delivery.send_index, delivery.receive_index) == (0, 1)
    (item,) = players[1].info.transferred.values()
    assert item.document is None
    assert item.channel is Channel.INTER
    assert item.signature == sign(document, players[0].key)
    assert registry.catalogue[document.id] == document.header()


def test_inter_transfer_refuses_downward_flow(make_player) -> None:
    players = _network(make_player, [T, C])
    document = new_document(players[0], b"eyes only", T, [1])

    with pytest.raises(ClearanceViolation):
        inter_clearance_transfer(
            _request(0, 1, document.id, TransferProtocol.INTER), 0, players=players, registry=Registry()
        )
    assert players[1].info.transferred == {}


def test_sender_skipping_registration_leaves_an_orphan_receipt(make_player) -> None:
    players = _network(make_player, [C, S, S])
    registry = Registry()
    document = new_document(players[0], b"memo", C, [1])

    inter_clearance_transfer(
        _request(0, 1, document.id, TransferProtocol.INTER),
        0,
        players=players,
        registry=registry,
        register_send=False,
    )

    assert [entry.kind for entry in registry.entries] == [EntryKind.RECEIVE]
    assert registry.unmatched_entries(0) == list(registry.entries)
    assert players[1].info.holds(document.id)


def test_intra_transfer_delivers_the_full_document(make_player) -> None:
    players = _network(make_player, [S, S])
    registry = Registry()
    document = new_document(players[0], b"full text", S, [1])

    delivery = intra_clearance_transfer(
        _request(0, 1, document.id, TransferProtocol.INTRA), 1, players=players, registry=registry
    )

    assert players[1].info.full_document(document.id) == document
    assert delivery.signature == sign(document, players[0].key)
    assert registry.entries[1].sig == delivery.signature


def test_intra_protocol_between_levels_is_a_mismatch(make_player) -> None:
    players = _network(make_player, [S, T])
    document = new_document(players[0], b"x", S, [1])

    with pytest.raises(LevelMismatch):
        intra_clearance_transfer(
            _request(0, 1, document.id, TransferProtocol.INTRA), 0, players=players, registry=Registry()
        )


def test_sender_must_hold_the_document(make_player) -> None:
    players = _network(make_player, [S, S, S])
    document = new_document(players[0], b"x", S, [1, 2])

    with pytest.raises(NotHolder):
        intra_clearance_transfer(
            _request(1, 2, document.id, TransferProtocol.INTRA), 0, players=players, registry=Registry()
        )


def test_signature_only_holder_cannot_forward(make_player) -> None:
    players = _network(make_player, [C, S, S])
    registry = Registry()
    document = new_document(players[0], b"memo", C, [1, 2])
    inter_clearance_transfer(_request(0, 1, document.id, TransferProtocol.INTER), 0, players=players, registry=registry)

    with pytest.raises(NotHolder):
        intra_clearance_transfer(_request(1, 2, document.id, TransferProtocol.INTRA), 1, players=players, registry=registry)


def test_loyal_disclosures_mirror_true_sets(make_player) -> None:
    players = _network(make_player, [S, S, S])
    registry = Registry()
    document = new_document(players[0], b"x", S, [1])
    intra_clearance_transfer(_request(0, 1, document.id, TransferProtocol.INTRA), 0, players=players, registry=registry)

    disclosures = collect_disclosures(players, 0)

    assert [d.player for d in disclosures] == [0, 1, 2]
    assert disclosures[0].created_sigs == frozenset({sign(document, players[0].key)})
    assert disclosures[1].transferred_sigs == frozenset(
        item.signature for item in players[1].info.transferred.values()
    )
    assert disclosures[2].created_sigs == disclosures[2].transferred_sigs == frozenset()


def _trusting_grant(make_player, concealing: bool):
    tag = BehaviorTag.CURIOUS_CONCEALING if concealing else BehaviorTag.CURIOUS_OVERT
    players = _network(make_player, [S, S, S, S], {3: BehaviorKind(tag=tag)})
    registry = Registry()
    document = new_document(players[0], b"plans", S, [1])
    intra_clearance_transfer(_request(0, 1, document.id, TransferProtocol.INTRA), 0, players=players, registry=registry)
    intra_clearance_transfer(
        _request(1, 3, document.id, TransferProtocol.INTRA, "asked nicely"), 1, players=players, registry=registry
    )
    return players, registry, document


def test_all_loyal_network_is_loyal(make_player) -> None:
    players = _network(make_player, [S, S, S])
    registry = Registry()
    document = new_document(players[0], b"x", S, [1, 2])
    for receiver in (1, 2):
        intra_clearance_transfer(
            _request(0, receiver, document.id, TransferProtocol.INTRA), 0, players=players, registry=registry
        )

    verdicts = loyalty_check(collect_disclosures(players, 0), registry, players, 0)

    assert [v.outcome for v in verdicts] == [Outcome.LOYAL] * 3
    assert all(v.evidence == () for v in verdicts)


def test_out_of_need_to_know_grant_is_flagged(make_player) -> None:
    players, registry, document = _trusting_grant(make_player, concealing=False)

    verdicts = loyalty_check(collect_disclosures(players, 1), registry, players, 1)

    assert [v.player for v in verdicts if v.curious] == [3]
    (evidence,) = verdicts[3].evidence
    assert evidence.kind is EvidenceKind.NEED_TO_KNOW_VIOLATION
    assert evidence.sig is not None and evidence.sig.doc_id == document.id


def test_concealed_holding_is_undisclosed_and_out_of_need_to_know(make_player) -> None:
    players, registry, document = _trusting_grant(make_player, concealing=True)

    disclosures = collect_disclosures(players, 1)
    verdicts = loyalty_check(disclosures, registry, players, 1)

    assert disclosures[3].transferred_sigs == frozenset()
    kinds = {evidence.kind for evidence in verdicts[3].evidence}
    assert kinds == {EvidenceKind.UNDISCLOSED_HOLDING, EvidenceKind.NEED_TO_KNOW_VIOLATION}
    assert not any(v.curious for v in verdicts[:3])


def test_unregistered_holding_is_flagged(make_player) -> None:
    players = _network(make_player, [S, S, S])
    document = new_document(players[0], b"x", S, [1])
    players[1].info.add_transferred(
        HeldItem(signature=sign(document, players[0].key), header=document.header(), document=document,
                 channel=Channel.EXCHANGE, sender=0, round=0)
    )

    verdicts = loyalty_check(collect_disclosures(players, 0), Registry(), players, 0)

    assert [e.kind for e in verdicts[1].evidence] == [EvidenceKind.UNREGISTERED_HOLDING]


def test_missing_disclosure_is_curious(make_player) -> None:
    players = _network(
        make_player, [S, S, S], {2: BehaviorKind(tag=BehaviorTag.CURIOUS_OVERT, params=BehaviorParams(withhold_disclosure=True))}
    )

    disclosures = collect_disclosures(players, 0)
    verdicts = loyalty_check(disclosures, Registry(), players, 0)

    assert len(disclosures) == 2
    assert verdicts[2].curious
    assert [e.kind for e in verdicts[2].evidence] == [EvidenceKind.MISSING_DISCLOSURE]
    assert verdicts[2].evidence[0].sig is None


def test_removed_signature_from_disclosure_is_undisclosed(make_player) -> None:
    players = _network(make_player, [S, S])
    registry = Registry()
    document = new_document(players[0], b"x", S, [1])
    intra_clearance_transfer(_request(0, 1, document.id, TransferProtocol.INTRA), 0, players=players, registry=registry)
    honest = collect_disclosures(players, 0)
    trimmed = [honest[0], Disclosure(player=1, round=0, created_sigs=honest[1].created_sigs)]

    verdicts = loyalty_check(trimmed, registry, players, 0)

    assert [e.kind for e in verdicts[1].evidence] == [EvidenceKind.UNDISCLOSED_HOLDING]


def test_sweep_flags_the_curious_player_only(make_player) -> None:
    players, registry, _ = _trusting_grant(make_player, concealing=False)
    for pid in (4, 5):
        players[pid] = make_player(pid, S)

    result = detection_sweep(players, registry, 1, assumed_m=1)

    assert result.assumptions_hold
    assert result.agreement
    assert not result.bound_exceeded
    assert [v.player for v in result.ratified if v.curious] == [3]
    assert result.ratified == result.verdicts
    assert len(result.disclosures) == len(players)


def test_sweep_with_no_curious_players_is_all_loyal(make_player) -> None:
    players = _network(make_player, [C, S, S, T])

    result = detection_sweep(players, Registry(), 0, assumed_m=1)

    assert all(v.outcome is Outcome.LOYAL for v in result.ratified)
    assert result.ba_messages == 4 + 4 * 3


def test_unwitnessed_traitor_exchange_escapes_the_sweep(make_player) -> None:
    traitor = lambda partner: BehaviorKind(  # noqa: E731
        tag=BehaviorTag.TRAITOR_COLLUDING, params=BehaviorParams(partners=(partner,))
    )
    players = _network(make_player, [S, S, S, S, S, S, S], {5: traitor(6), 6: traitor(5)})
    document = new_document(players[5], b"loot", S, [])
    players[6].info.add_transferred(
        HeldItem(signature=sign(document, players[5].key), header=document.header(), document=document,
                 channel=Channel.EXCHANGE, sender=5, round=0)
    )
    players[5].off_book.add(document.id)
    players[6].off_book.add(document.id)

    result = detection_sweep(
        players, Registry(), 0, assumed_m=2, traitor_strategy=BATraitorStrategy.HONEST
    )

    assert not any(v.curious for v in result.ratified)
    assert document.id not in {sig.doc_id for d in result.disclosures for sig in d.transferred_sigs}


def test_sweep_warns_when_loyal_players_do_not_outnumber(make_player, caplog) -> None:
    curious = BehaviorKind(tag=BehaviorTag.CURIOUS_OVERT)
    players = _network(make_player, [S, S, S, S], {2: curious, 3: curious})

    with caplog.at_level("WARNING"):
        result = detection_sweep(players, Registry(), 0, assumed_m=1)

    assert not result.assumptions_hold
    assert result.bound_exceeded
    assert any("outnumber" in record.getMessage() for record in caplog.records)


def test_returning_a_document_to_its_origin_leaves_the_registry_untouched(make_player) -> None:
    players = _network(make_player, [S, S])
    registry = Registry()
    document = new_document(players[0], b"loop", S, [1])
    intra_clearance_transfer(_request(0, 1, document.id, TransferProtocol.INTRA), 0, players=players, registry=registry)

    with pytest.raises(AlreadyHeld):
        intra_clearance_transfer(
            _request(1, 0, document.id, TransferProtocol.INTRA), 1, players=players, registry=registry
        )

    assert len(registry.entries) == 2
    assert registry.unmatched_entries(1) == []
    assert players[0].info.transferred == {}


def test_repeat_delivery_to_a_holder_is_refused(make_player) -> None:
    players = _network(make_player, [C, S])
    registry = Registry()
    document = new_document(players[0], b"memo", C, [1])
    request = _request(0, 1, document.id, TransferProtocol.INTER)
    inter_clearance_transfer(request, 0, players=players, registry=registry)

    with pytest.raises(AlreadyHeld):
        inter_clearance_transfer(request, 1, players=players, registry=registry)
    assert len(registry.entries) == 2
