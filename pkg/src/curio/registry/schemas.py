"""Pydantic schemas for registry log entries."""

from __future__ import annotations

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field

from ..models import PlayerId, Signature, TransferProtocol


class EntryKind(str, Enum):
    SEND = "send"
    RECEIVE = "receive"


class RegistryEntry(BaseModel):
    """One registered send or receipt."""

    model_config = ConfigDict(frozen=True)

    index: int = Field(ge=0)
    kind: EntryKind
    actor: PlayerId
    counterparty: PlayerId
    sig: Signature
    pretext: str = ""
    round: int = Field(ge=0)
    protocol: TransferProtocol
