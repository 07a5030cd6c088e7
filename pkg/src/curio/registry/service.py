"""The grand designer's append-only registry.

Every registered send and receipt is appended in (round, arrival) order.
Nothing is judged at logging time: a missing half of a transfer only shows
up later through `unmatched_entries` and the loyalty check.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from types import MappingProxyType
from typing import Iterable, Mapping

from ..errors import CurioError
from ..models import DocumentHeader, DocumentId, PlayerId, Signature, TransferProtocol
from .schemas import EntryKind, RegistryEntry

logger = logging.getLogger(__name__)


class RegistryError(CurioError):
    """Base class for registry errors."""


class SelfTransfer(RegistryError):
    """Raised when a player registers a transfer with itself."""


class RoundOutOfOrder(RegistryError):
    """Raised when an entry would precede the last logged round."""


def make_pretext(doc_id: DocumentId, justification: str) -> str:
    """Pretext text: the claimed document id, a space, then the justification."""

    return f"{doc_id} {justification}".strip()


def pretext_document(pretext: str) -> DocumentId | None:
    """Document id claimed by a pretext, if any."""

    doc_id, _, _ = pretext.partition(" ")
    return doc_id or None


class Registry:
    """Append-only log of registered transfers plus the header catalogue."""

    def __init__(self) -> None:
        self._entries: list[RegistryEntry] = []
        self._catalogue: dict[DocumentId, DocumentHeader] = {}
        # digest -> (document id, round first seen)
        self._resolution: dict[bytes, tuple[DocumentId, int]] = {}

    @property
    def entries(self) -> tuple[RegistryEntry, ...]:
        return tuple(self._entries)

    @property
    def catalogue(self) -> Mapping[DocumentId, DocumentHeader]:
        return MappingProxyType(self._catalogue)

    def __len__(self) -> int:
        return len(self._entries)

    def catalogue_document(self, header: DocumentHeader) -> None:
        """Record the markings of a newly authored document."""

        self._catalogue.setdefault(header.id, header)

    def register_send(
        self,
        actor: PlayerId,
        counterparty: PlayerId,
        sig: Signature,
        pretext: str,
        round: int,
        protocol: TransferProtocol,
    ) -> int:
        """Log the sender's half of a transfer; returns the entry index."""

        return self._append(EntryKind.SEND, actor, counterparty, sig, pretext, round, protocol)

    def register_receive(
        self,
        actor: PlayerId,
        counterparty: PlayerId,
        sig: Signature,
        round: int,
        protocol: TransferProtocol,
    ) -> int:
        """Log the receiver's half of a transfer; returns the entry index."""

        return self._append(EntryKind.RECEIVE, actor, counterparty, sig, "", round, protocol)

    def _append(
        self,
        kind: EntryKind,
        actor: PlayerId,
        counterparty: PlayerId,
        sig: Signature,
        pretext: str,
        round: int,
        protocol: TransferProtocol,
    ) -> int:
        if actor == counterparty:
            raise SelfTransfer(f"player {actor} cannot register a transfer with itself")
        if self._entries and round < self._entries[-1].round:
            raise RoundOutOfOrder(
                f"round {round} precedes last logged round {self._entries[-1].round}"
            )
        entry = RegistryEntry(
            index=len(self._entries),
            kind=kind,
            actor=actor,
            counterparty=counterparty,
            sig=sig,
            pretext=pretext,
            round=round,
            protocol=protocol,
        )
        self._entries.append(entry)
        self._index(entry)
        logger.debug(
            "registry entry appended",
            extra={"ctx_index": entry.index, "ctx_kind": kind.value, "ctx_round": round},
        )
        return entry.index

    def _index(self, entry: RegistryEntry) -> None:
        if entry.kind is EntryKind.SEND:
            doc_id = pretext_document(entry.pretext)
        else:
            doc_id = entry.sig.doc_id
        if doc_id is not None:
            self._resolution.setdefault(entry.sig.digest, (doc_id, entry.round))

    def entries_up_to(self, up_to_round: int) -> list[RegistryEntry]:
        return [entry for entry in self._entries if entry.round <= up_to_round]

    def expected_transferred_set(self, player: PlayerId, up_to_round: int) -> frozenset[Signature]:
        """Signatures the registry believes ``player`` has been handed.

        Receipts the player registered and sends naming it as counterparty
        both count.
        """

        expected: set[Signature] = set()
        for entry in self.entries_up_to(up_to_round):
            if entry.kind is EntryKind.RECEIVE and entry.actor == player:
                expected.add(entry.sig)
            elif entry.kind is EntryKind.SEND and entry.counterparty == player:
                expected.add(entry.sig)
        return frozenset(expected)

    def unmatched_entries(self, up_to_round: int) -> list[RegistryEntry]:
        """Sends lacking a matching receipt and receipts lacking a matching send."""

        sends: dict[tuple[bytes, PlayerId, PlayerId], list[RegistryEntry]] = defaultdict(list)
        receipts: dict[tuple[bytes, PlayerId, PlayerId], list[RegistryEntry]] = defaultdict(list)
        for entry in self.entries_up_to(up_to_round):
            if entry.kind is EntryKind.SEND:
                sends[(entry.sig.digest, entry.actor, entry.counterparty)].append(entry)
            else:
                receipts[(entry.sig.digest, entry.counterparty, entry.actor)].append(entry)

        orphans: list[RegistryEntry] = []
        for key in sends.keys() | receipts.keys():
            sent, received = sends.get(key, []), receipts.get(key, [])
            orphans.extend(sent[len(received):])
            orphans.extend(received[len(sent):])
        return sorted(orphans, key=lambda entry: entry.index)

    def resolve(self, sig: Signature, up_to_round: int | None = None) -> DocumentHeader | None:
        """Header of the document behind a registered signature, if known."""

        resolved = self._resolution.get(sig.digest)
        if resolved is None:
            return None
        doc_id, first_round = resolved
        if up_to_round is not None and first_round > up_to_round:
            return None
        return self._catalogue.get(doc_id)

    @classmethod
    def restore(
        cls, entries: Iterable[RegistryEntry], catalogue: Iterable[DocumentHeader]
    ) -> Registry:
        """Rebuild a registry from an exported log, checking index continuity."""

        registry = cls()
        for header in catalogue:
            registry.catalogue_document(header)
        for entry in entries:
            if entry.index != len(registry._entries):
                raise RegistryError(f"log entry {entry.index} out of sequence")
            if registry._entries and entry.round < registry._entries[-1].round:
                raise RoundOutOfOrder(f"log entry {entry.index} precedes its predecessor")
            registry._entries.append(entry)
            registry._index(entry)
        return registry
