"""What a player can see at the start of a round, and what it can do."""

from __future__ import annotations

from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, field_serializer

from ..models import (
    BehaviorKind,
    Channel,
    ClearanceLevel,
    DocumentHeader,
    DocumentId,
    PlayerId,
    SealedEnvelope,
    TrustPolicy,
)


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class AuthorAction(_Frozen):
    kind: Literal["author"] = "author"
    level: ClearanceLevel
    need_to_know: frozenset[PlayerId]
    share_with: tuple[PlayerId, ...] = ()

    @field_serializer("need_to_know")
    def _sorted(self, value: frozenset[PlayerId]) -> list[PlayerId]:
        return sorted(value)


class RequestAction(_Frozen):
    kind: Literal["request"] = "request"
    holder: PlayerId
    doc_id: DocumentId


class GrantAction(_Frozen):
    kind: Literal["grant"] = "grant"
    requester: PlayerId
    doc_id: DocumentId


class DenyAction(_Frozen):
    kind: Literal["deny"] = "deny"
    requester: PlayerId
    doc_id: DocumentId


class ExchangeAction(_Frozen):
    """Hand a full document to a partner outside both protocols."""

    kind: Literal["exchange"] = "exchange"
    partner: PlayerId
    doc_id: DocumentId


class RetainAction(_Frozen):
    kind: Literal["retain"] = "retain"
    envelopes: tuple[SealedEnvelope, ...]


Action = Annotated[
    Union[AuthorAction, RequestAction, GrantAction, DenyAction, ExchangeAction, RetainAction],
    Field(discriminator="kind"),
]


class PendingRequest(_Frozen):
    requester: PlayerId
    requester_clearance: ClearanceLevel
    holder: PlayerId
    doc_id: DocumentId
    round: int = Field(ge=0)


class HoldingView(_Frozen):
    """One of the player's own holdings; ``channel`` is None for authored documents."""

    header: DocumentHeader
    full: bool
    channel: Channel | None = None


class DirectoryEntry(_Frozen):
    """A neighbour holding a full copy of a document."""

    holder: PlayerId
    header: DocumentHeader


class ScheduledDocument(_Frozen):
    level: ClearanceLevel
    need_to_know: frozenset[PlayerId]


class ObservableState(_Frozen):
    """Round-start snapshot handed to a step function.

    Step functions see nothing else, so equal snapshots yield equal actions.
    """

    player: PlayerId
    clearance: ClearanceLevel
    behavior: BehaviorKind
    trust: TrustPolicy
    round: int = Field(ge=0)
    neighbors: tuple[PlayerId, ...] = ()
    roster: dict[PlayerId, ClearanceLevel] = Field(default_factory=dict)
    holdings: tuple[HoldingView, ...] = ()
    directory: tuple[DirectoryEntry, ...] = ()
    partner_holdings: dict[PlayerId, frozenset[DocumentId]] = Field(default_factory=dict)
    inbox: tuple[PendingRequest, ...] = ()
    outstanding: frozenset[DocumentId] = frozenset()
    denials: frozenset[tuple[DocumentId, PlayerId]] = frozenset()
    observed: tuple[SealedEnvelope, ...] = ()
    schedule: tuple[ScheduledDocument, ...] = ()

    def holds(self, doc_id: DocumentId) -> bool:
        return any(holding.header.id == doc_id for holding in self.holdings)
