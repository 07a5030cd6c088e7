from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from curio.crypto import sign
from curio.models import ClearanceLevel, Signature, TransferProtocol, new_document
from curio.protocols import TransferRequest
from curio.protocols.service import intra_clearance_transfer
from curio.registry import (
    EntryKind,
    Registry,
    RegistryError,
    RoundOutOfOrder,
    SelfTransfer,
    make_pretext,
    pretext_document,
)


@pytest.fixture
def signed(make_player):
    author = make_player(0)
    document = new_document(author, b"payload", ClearanceLevel.SECRET, [1])
    return document, sign(document, author.key)


def test_pretext_names_the_document() -> None:
    pretext = make_pretext("3:1", "requested by analyst")

    assert pretext == "3:1 requested by analyst"
    assert pretext_document(pretext) == "3:1"
    assert pretext_document("") is None


def test_send_and_receive_append_in_order(signed) -> None:
    document, sig = signed
    registry = Registry()
    registry.catalogue_document(document.header())

    send = registry.register_send(0, 1, sig, make_pretext(document.id, "share"), 2, TransferProtocol.INTRA)
    receive = registry.register_receive(1, 0, sig, 2, TransferProtocol.INTRA)

    assert (send, receive) == (0, 1)
    assert [entry.kind for entry in registry.entries] == [EntryKind.SEND, EntryKind.RECEIVE]
    assert len(registry) == 2
    assert registry.unmatched_entries(2) == []


def test_self_transfer_is_rejected(signed) -> None:
    _, sig = signed

    with pytest.raises(SelfTransfer):
        Registry().register_send(1, 1, sig, "", 0, TransferProtocol.INTRA)


def test_rounds_never_go_backwards(signed) -> None:
    _, sig = signed
    registry = Registry()
    registry.register_send(0, 1, sig, "", 3, TransferProtocol.INTRA)

    with pytest.raises(RoundOutOfOrder):
        registry.register_receive(1, 0, sig, 2, TransferProtocol.INTRA)


def test_expected_set_counts_receipts_and_sends_naming_the_player(signed) -> None:
    _, sig = signed
    registry = Registry()
    registry.register_send(0, 1, sig, "", 1, TransferProtocol.INTRA)

    assert registry.expected_transferred_set(1, 1) == frozenset({sig})
    assert registry.expected_transferred_set(1, 0) == frozenset()
    assert registry.expected_transferred_set(0, 1) == frozenset()


def test_orphan_receipt_is_unmatched(signed) -> None:
    _, sig = signed
    registry = Registry()
    registry.register_receive(1, 0, sig, 0, TransferProtocol.INTER)

    orphans = registry.unmatched_entries(0)

    assert [entry.kind for entry in orphans] == [EntryKind.RECEIVE]


def test_repeated_sends_pair_one_to_one(signed) -> None:
    _, sig = signed
    registry = Registry()
    registry.register_send(0, 1, sig, "", 0, TransferProtocol.INTRA)
    registry.register_send(0, 1, sig, "", 0, TransferProtocol.INTRA)
    registry.register_receive(1, 0, sig, 0, TransferProtocol.INTRA)

    assert [entry.index for entry in registry.unmatched_entries(0)] == [1]


def test_resolve_uses_pretext_and_respects_round(signed) -> None:
    document, sig = signed
    registry = Registry()
    registry.catalogue_document(document.header())
    registry.register_send(0, 1, sig, make_pretext(document.id, "share"), 4, TransferProtocol.INTRA)

    assert registry.resolve(sig) == document.header()
    assert registry.resolve(sig, up_to_round=3) is None


def test_restore_rebuilds_an_equivalent_registry(signed) -> None:
    document, sig = signed
    original = Registry()
    original.catalogue_document(document.header())
    original.register_send(0, 1, sig, make_pretext(document.id, "share"), 0, TransferProtocol.INTRA)
    original.register_receive(1, 0, sig, 1, TransferProtocol.INTRA)

    restored = Registry.restore(original.entries, [document.header()])

    assert restored.entries == original.entries
    assert restored.expected_transferred_set(1, 1) == original.expected_transferred_set(1, 1)
    assert restored.resolve(sig) == document.header()


def test_restore_rejects_gaps(signed) -> None:
    _, sig = signed
    original = Registry()
    original.register_send(0, 1, sig, "", 0, TransferProtocol.INTRA)
    original.register_receive(1, 0, sig, 0, TransferProtocol.INTRA)

    with pytest.raises(RegistryError):
        Registry.restore(original.entries[1:], [])


def test_chained_transfer_credits_each_hop_with_its_sender_signature(make_player) -> None:
    players = {pid: make_player(pid) for pid in range(3)}
    registry = Registry()
    document = new_document(players[0], b"relay", ClearanceLevel.SECRET, [1, 2])

    for round, (sender, receiver) in enumerate([(0, 1), (1, 2)]):
        request = TransferRequest(
            sender=sender, receiver=receiver, doc_id=document.id, pretext="relay", protocol=TransferProtocol.INTRA
        )
        intra_clearance_transfer(request, round, players=players, registry=registry)

    assert sign(document, players[0].key) in registry.expected_transferred_set(1, 1)
    assert sign(document, players[1].key) in registry.expected_transferred_set(2, 1)
    assert registry.expected_transferred_set(0, 1) == frozenset()


_SIGS = [Signature(digest=bytes([index]) * 32, signer=index % 4, doc_id=f"{index % 4}:{index}") for index in range(6)]

_entries = st.lists(
    st.tuples(
        st.booleans(),
        st.integers(min_value=0, max_value=3),
        st.integers(min_value=1, max_value=3),
        st.integers(min_value=0, max_value=2),
        st.sampled_from(_SIGS),
    ),
    max_size=25,
)


@given(_entries)
def test_expected_sets_only_grow_with_the_round(entries) -> None:
    registry = Registry()
    round = 0
    for is_send, actor, offset, step, sig in entries:
        round += step
        counterparty = (actor + offset) % 4
        if is_send:
            registry.register_send(actor, counterparty, sig, "", round, TransferProtocol.INTRA)
        else:
            registry.register_receive(actor, counterparty, sig, round, TransferProtocol.INTRA)

    for player in range(4):
        for up_to in range(round + 1):
            assert registry.expected_transferred_set(player, up_to) <= registry.expected_transferred_set(
                player, up_to + 1
            )
