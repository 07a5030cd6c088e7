"""Pydantic schemas for transfers, disclosures and verdicts."""

from __future__ import annotations

from enum import Enum
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, field_serializer, model_validator

from ..models import DocumentId, PlayerId, SealedEnvelope, Signature, TransferProtocol


def _sorted_signatures(signatures: frozenset[Signature]) -> list[dict[str, Any]]:
    return [sig.model_dump(mode="json") for sig in sorted(signatures, key=lambda sig: sig.digest)]


class TransferRequest(BaseModel):
    """A sender's intent to move one document to one receiver."""

    model_config = ConfigDict(frozen=True)

    sender: PlayerId
    receiver: PlayerId
    doc_id: DocumentId
    pretext: str
    protocol: TransferProtocol


class Delivery(BaseModel):
    """Outcome of a completed protocol run."""

    model_config = ConfigDict(frozen=True)

    envelope: SealedEnvelope
    signature: Signature
    protocol: TransferProtocol
    send_index: int | None = None
    receive_index: int | None = None


class Disclosure(BaseModel):
    """Signatures of both information sets, handed over in unison at a check."""

    model_config = ConfigDict(frozen=True)

    player: PlayerId
    round: int = Field(ge=0)
    created_sigs: frozenset[Signature] = frozenset()
    transferred_sigs: frozenset[Signature] = frozenset()

    @field_serializer("created_sigs", "transferred_sigs")
    def _render(self, value: frozenset[Signature]) -> list[dict[str, Any]]:
        return _sorted_signatures(value)


class EvidenceKind(str, Enum):
    UNDISCLOSED_HOLDING = "undisclosed_holding"
    UNREGISTERED_HOLDING = "unregistered_holding"
    NEED_TO_KNOW_VIOLATION = "need_to_know_violation"
    MISSING_DISCLOSURE = "missing_disclosure"


class Evidence(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: EvidenceKind
    sig: Signature | None = None
    detail: str = ""

    @model_validator(mode="after")
    def _names_one_signature(self) -> Evidence:
        if (self.sig is None) != (self.kind is EvidenceKind.MISSING_DISCLOSURE):
            raise ValueError(f"{self.kind.value} evidence must name exactly one signature")
        return self


class Outcome(str, Enum):
    LOYAL = "loyal"
    CURIOUS = "curious"


class Verdict(BaseModel):
    model_config = ConfigDict(frozen=True)

    player: PlayerId
    outcome: Outcome
    evidence: tuple[Evidence, ...] = ()
    round: int = Field(ge=0)

    @model_validator(mode="after")
    def _curious_iff_evidence(self) -> Verdict:
        if (self.outcome is Outcome.CURIOUS) != bool(self.evidence):
            raise ValueError("outcome must be curious exactly when evidence is present")
        return self

    @property
    def curious(self) -> bool:
        return self.outcome is Outcome.CURIOUS


class SweepResult(BaseModel):
    """Everything one loyalty check produced."""

    round: int
    disclosures: list[Disclosure]
    verdicts: list[Verdict]
    ratified: list[Verdict]
    agreement: bool
    ba_messages: int
    bound_exceeded: bool
    assumptions_hold: bool
