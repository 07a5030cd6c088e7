"""Domain models shared by every simulator component.

Documents, clearance levels and players live here together with the value
types that travel between them (signatures, sealed envelopes, behaviour
descriptors), so feature packages can depend on this module without
depending on each other.
"""

from __future__ import annotations

from enum import Enum
from typing import Annotated, Iterable, TypeAlias

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    field_serializer,
    field_validator,
    model_validator,
)

from .errors import ClearanceViolation

PlayerId: TypeAlias = int
DocumentId: TypeAlias = str

GRAND_DESIGNER: PlayerId = -1
DIGEST_SIZE = 32

Digest = Annotated[bytes, Field(min_length=DIGEST_SIZE, max_length=DIGEST_SIZE)]


class ClearanceLevel(str, Enum):
    """Three-tier clearance hierarchy, lowest first."""

    CONFIDENTIAL = "confidential"
    SECRET = "secret"
    TOP_SECRET = "top_secret"

    @property
    def rank(self) -> int:
        return _RANKS[self]


_RANKS = {level: position for position, level in enumerate(ClearanceLevel)}


class TransferProtocol(str, Enum):
    """Registered transfer protocols."""

    INTER = "inter"
    INTRA = "intra"


class Channel(str, Enum):
    """How an item reached its holder."""

    INTER = "inter"
    INTRA = "intra"
    EXCHANGE = "exchange"


def dominates(a: ClearanceLevel, b: ClearanceLevel) -> bool:
    """True iff clearance ``a`` is at or above ``b``."""

    return a.rank >= b.rank


def make_document_id(origin: PlayerId, counter: int) -> DocumentId:
    return f"{origin}:{counter}"


class DocumentHeader(BaseModel):
    """Classification markings of a document, never its content."""

    model_config = ConfigDict(frozen=True)

    id: DocumentId
    origin: PlayerId
    level: ClearanceLevel
    need_to_know: frozenset[PlayerId]

    @field_serializer("need_to_know")
    def _sorted_need_to_know(self, value: frozenset[PlayerId]) -> list[PlayerId]:
        return sorted(value)


class Document(BaseModel):
    """A unit of classified information."""

    model_config = ConfigDict(frozen=True)

    id: DocumentId
    content: bytes = Field(repr=False)
    level: ClearanceLevel
    origin: PlayerId
    need_to_know: frozenset[PlayerId]

    @model_validator(mode="after")
    def _origin_needs_to_know(self) -> Document:
        if self.origin not in self.need_to_know:
            raise ValueError("document origin must be in need_to_know")
        return self

    def header(self) -> DocumentHeader:
        return DocumentHeader(
            id=self.id, origin=self.origin, level=self.level, need_to_know=self.need_to_know
        )

    def redacted(self) -> Document:
        """Copy with the content replaced by zero bytes of the same length."""

        return self.model_copy(update={"content": bytes(len(self.content))})


class SigningKey(BaseModel):
    """Per-player secret used for the blinding signature."""

    model_config = ConfigDict(frozen=True)

    key_id: PlayerId
    secret: Digest = Field(repr=False)


class Signature(BaseModel):
    """Keyed digest binding one document to one signer."""

    model_config = ConfigDict(frozen=True)

    digest: Digest
    signer: PlayerId
    doc_id: DocumentId

    @field_validator("digest", mode="before")
    @classmethod
    def _parse_hex(cls, value: object) -> object:
        if isinstance(value, str):
            return bytes.fromhex(value)
        return value

    @field_serializer("digest")
    def _render_hex(self, digest: bytes) -> str:
        return digest.hex()

    @property
    def digest_hex(self) -> str:
        return self.digest.hex()


class Parcel(BaseModel):
    """What a sealed envelope encloses: always a signature, sometimes the document."""

    model_config = ConfigDict(frozen=True)

    signature: Signature
    header: DocumentHeader
    document: Document | None = None


class SealedEnvelope(BaseModel):
    """Simulated public-key ciphertext addressed to one recipient."""

    model_config = ConfigDict(frozen=True)

    sender: PlayerId | None = None
    recipient: PlayerId
    payload: bytes = Field(repr=False)
    inner: Parcel = Field(repr=False)


class BehaviorTag(str, Enum):
    LOYAL = "loyal"
    CURIOUS_OVERT = "curious_overt"
    CURIOUS_CONCEALING = "curious_concealing"
    TRAITOR_COLLUDING = "traitor_colluding"


class ConcealPolicy(str, Enum):
    """Which transferred items a player leaves out of its disclosure."""

    NOTHING = "nothing"
    OUT_OF_NEED_TO_KNOW = "out_of_need_to_know"
    OFF_BOOK = "off_book"
    OFF_BOOK_AND_OUT_OF_NEED_TO_KNOW = "off_book_and_out_of_need_to_know"


_DEFAULT_CONCEAL = {
    BehaviorTag.LOYAL: ConcealPolicy.NOTHING,
    BehaviorTag.CURIOUS_OVERT: ConcealPolicy.NOTHING,
    BehaviorTag.CURIOUS_CONCEALING: ConcealPolicy.OUT_OF_NEED_TO_KNOW,
    BehaviorTag.TRAITOR_COLLUDING: ConcealPolicy.OFF_BOOK_AND_OUT_OF_NEED_TO_KNOW,
}


class BehaviorParams(BaseModel):
    """Strategy parameters; each behaviour reads the ones it needs."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    request_rate: int = Field(default=1, ge=0, description="Out-of-need-to-know requests per round")
    exchange_rate: int = Field(default=1, ge=0, description="Off-book items passed to each partner per round")
    partners: tuple[PlayerId, ...] = ()
    conceal: ConcealPolicy | None = None
    skip_registration: bool = False
    withhold_disclosure: bool = False


class BehaviorKind(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    tag: BehaviorTag = BehaviorTag.LOYAL
    params: BehaviorParams = Field(default_factory=BehaviorParams)

    @property
    def is_loyal(self) -> bool:
        return self.tag is BehaviorTag.LOYAL

    @property
    def conceal(self) -> ConcealPolicy:
        return self.params.conceal or _DEFAULT_CONCEAL[self.tag]


class TrustPolicy(BaseModel):
    """How readily a player hands documents to peers that ask for them."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    grant_probability: float = Field(default=0.5, ge=0.0, le=1.0)
    verify_need_to_know: bool = False


class HeldItem(BaseModel):
    """One entry of the "transferred by other players" information set."""

    model_config = ConfigDict(frozen=True)

    signature: Signature
    header: DocumentHeader
    document: Document | None = None
    channel: Channel
    sender: PlayerId
    round: int = Field(ge=0)


class InformationSet(BaseModel):
    """A player's two partitioned information sets."""

    owner: PlayerId
    created: dict[DocumentId, Document] = Field(default_factory=dict)
    transferred: dict[str, HeldItem] = Field(default_factory=dict)

    def add_created(self, document: Document) -> None:
        if document.origin != self.owner:
            raise ValueError(f"player {self.owner} cannot list {document.id} as created")
        self.created[document.id] = document

    def add_transferred(self, item: HeldItem) -> None:
        if item.header.origin == self.owner:
            raise ValueError(f"player {self.owner} cannot receive its own document {item.header.id}")
        self.transferred.setdefault(item.signature.digest_hex, item)

    def full_document(self, doc_id: DocumentId) -> Document | None:
        """The document if held in full, from either set."""

        if doc_id in self.created:
            return self.created[doc_id]
        for item in self.transferred.values():
            if item.document is not None and item.document.id == doc_id:
                return item.document
        return None

    def holds(self, doc_id: DocumentId) -> bool:
        """True when the document is held in any form, signature-only included."""

        if doc_id in self.created:
            return True
        return any(item.header.id == doc_id for item in self.transferred.values())

    def replace_document(self, document: Document) -> None:
        """Swap every full copy of ``document.id`` for the given value."""

        if document.id in self.created:
            self.created[document.id] = document
        for key, item in self.transferred.items():
            if item.document is not None and item.document.id == document.id:
                self.transferred[key] = item.model_copy(update={"document": document})


class Player(BaseModel):
    id: PlayerId
    clearance: ClearanceLevel
    behavior: BehaviorKind = Field(default_factory=BehaviorKind)
    trust: TrustPolicy = Field(default_factory=TrustPolicy)
    key: SigningKey = Field(repr=False)
    info: InformationSet
    message_store: list[SealedEnvelope] = Field(default_factory=list, repr=False)
    off_book: set[DocumentId] = Field(default_factory=set)
    doc_counter: int = 0


def may_receive(player: Player, document: Document | DocumentHeader) -> bool:
    """Access (clearance dominance) and need-to-know must both hold."""

    return dominates(player.clearance, document.level) and player.id in document.need_to_know


def new_document(
    origin: Player, content: bytes, level: ClearanceLevel, ntk: Iterable[PlayerId]
) -> Document:
    """Author a document and add it to the origin's created set."""

    if not dominates(origin.clearance, level):
        raise ClearanceViolation(
            f"player {origin.id} ({origin.clearance.value}) cannot author at {level.value}"
        )
    document = Document(
        id=make_document_id(origin.id, origin.doc_counter),
        content=content,
        level=level,
        origin=origin.id,
        need_to_know=frozenset(ntk) | {origin.id},
    )
    origin.doc_counter += 1
    origin.info.add_created(document)
    return document
