"""Pydantic schemas for oral-messages Byzantine agreement."""

from __future__ import annotations

from enum import Enum
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..models import PlayerId
from ..protocols.schemas import Verdict


class BATraitorStrategy(str, Enum):
    """How adversarial players relay the verdict vector during ratification."""

    HONEST = "honest"
    WHITEWASH = "whitewash"
    EQUIVOCATE = "equivocate"


class BAConfig(BaseModel):
    """Participants of one agreement: the commander plus n-1 lieutenants."""

    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=1)
    m: int = Field(ge=0)
    commander: PlayerId = 0
    lieutenants: tuple[PlayerId, ...] = ()

    @model_validator(mode="before")
    @classmethod
    def _default_lieutenants(cls, data: Any) -> Any:
        if isinstance(data, dict) and not data.get("lieutenants"):
            n = int(data.get("n", 1))
            commander = data.get("commander", 0)
            data = {
                **data,
                "lieutenants": tuple(pid for pid in range(n) if pid != commander)[: n - 1],
            }
        return data

    @model_validator(mode="after")
    def _check_participants(self) -> BAConfig:
        if len(self.lieutenants) != self.n - 1:
            raise ValueError(f"expected {self.n - 1} lieutenants, got {len(self.lieutenants)}")
        if self.commander in self.lieutenants or len(set(self.lieutenants)) != len(self.lieutenants):
            raise ValueError("participants must be distinct")
        return self

    @property
    def participants(self) -> tuple[PlayerId, ...]:
        return (self.commander, *self.lieutenants)


class BAMessage(BaseModel):
    """A relayed value together with the chain of players it passed through."""

    model_config = ConfigDict(frozen=True)

    path: tuple[PlayerId, ...]
    value: bytes

    @model_validator(mode="after")
    def _simple_path(self) -> BAMessage:
        if len(set(self.path)) != len(self.path):
            raise ValueError("relay path repeats a player")
        return self


class BroadcastOutcome(BaseModel):
    decisions: dict[PlayerId, bytes]
    messages: int


class BAViolation(BaseModel):
    """A run in which loyal players disagreed or ignored a loyal commander."""

    kind: Literal["agreement", "validity"]
    commander: PlayerId
    commander_value: bytes
    traitors: tuple[PlayerId, ...]
    decisions: dict[PlayerId, bytes]


class Ratification(BaseModel):
    verdicts: list[Verdict]
    agreed: bool
    messages: int
    bound_exceeded: bool
