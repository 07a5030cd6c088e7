"""Scenario, event and report schemas for the round-synchronous engine."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_serializer

from ..byzantine.schemas import BATraitorStrategy
from ..models import (
    BehaviorKind,
    BehaviorTag,
    Channel,
    ClearanceLevel,
    DocumentHeader,
    DocumentId,
    PlayerId,
    TransferProtocol,
    TrustPolicy,
)
from ..protocols.schemas import Disclosure, Verdict
from ..registry.schemas import RegistryEntry


class PlayerSpec(BaseModel):
    """One player of a scenario; its id is its position in the player list."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    clearance: ClearanceLevel
    behavior: BehaviorKind = Field(default_factory=BehaviorKind)
    trust: TrustPolicy = Field(default_factory=TrustPolicy)


class AuthoringEntry(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    round: int = Field(ge=0)
    player: PlayerId
    level: ClearanceLevel
    need_to_know: frozenset[PlayerId] = frozenset()

    @field_serializer("need_to_know")
    def _sorted(self, value: frozenset[PlayerId]) -> list[PlayerId]:
        return sorted(value)


class Scenario(BaseModel):
    """Everything a run depends on besides the code itself."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    players: list[PlayerSpec] = Field(min_length=2)
    topology: dict[PlayerId, list[PlayerId]] | None = None
    rounds: int = Field(ge=1)
    check_every: int = Field(default=5, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    assumed_m: int = Field(default=1, ge=0)
    authoring_schedule: list[AuthoringEntry] = Field(default_factory=list)
    ba_traitor_strategy: BATraitorStrategy = BATraitorStrategy.WHITEWASH


class ScenarioIssue(BaseModel):
    """Field-level diagnostic; ``field`` is a dotted path such as ``players.2.behavior``."""

    field: str
    message: str


class SimEvent(BaseModel):
    """One change to who holds what."""

    model_config = ConfigDict(frozen=True)

    round: int
    kind: Literal["authored", "transfer", "exchange"]
    doc_id: DocumentId
    actor: PlayerId
    receiver: PlayerId | None = None
    protocol: TransferProtocol | None = None
    full: bool = True
    header: DocumentHeader | None = None


class HoldingRecord(BaseModel):
    doc_id: DocumentId
    channel: Channel
    sender: PlayerId
    round: int
    full: bool
    in_need_to_know: bool


class PlayerTruth(BaseModel):
    """A player's real holdings, concealed ones included."""

    player: PlayerId
    tag: BehaviorTag
    created: list[DocumentId]
    transferred: list[HoldingRecord]
    retained_envelopes: int = 0


class CheckRecord(BaseModel):
    round: int
    disclosures: list[Disclosure]
    verdicts: list[Verdict]
    ratified: list[Verdict]
    agreement: bool
    ba_messages: int
    bound_exceeded: bool
    assumptions_hold: bool
    truth: list[PlayerTruth]


class GroundTruth(BaseModel):
    tags: dict[PlayerId, BehaviorTag]
    first_acquisition: dict[PlayerId, int] = Field(
        default_factory=dict, description="First round each player came to hold an item outside its need-to-know"
    )
    transfers: int = 0
    exchanges: int = 0
    denied_requests: int = 0
    out_of_ntk_held: int = 0


class Metrics(BaseModel):
    true_positives: int
    false_positives: int
    false_negatives: int
    rounds_to_detection: dict[PlayerId, int]
    ba_messages: int
    transfers: int
    exchanges: int = 0
    denied_requests: int = 0
    out_of_ntk_held: int = 0
    agreement_failures: int = 0
    bound_exceeded_checks: int = 0


class ReportHeader(BaseModel):
    tool_version: str
    seed: int
    redacted: bool = False
    scenario: Scenario


class Report(BaseModel):
    header: ReportHeader
    events: list[SimEvent] = Field(default_factory=list)
    registry: list[RegistryEntry] = Field(default_factory=list)
    checks: list[CheckRecord] = Field(default_factory=list)
    metrics: Metrics | None = None
    ground_truth: GroundTruth | None = None


class PropertyViolation(BaseModel):
    """A role assignment under which a detection property failed."""

    index: int
    assignment: dict[PlayerId, BehaviorTag]
    kind: Literal["soundness", "completeness", "blind", "replay"]
    player: PlayerId | None = None
    round: int | None = None
    detail: str
    boundary: bool = Field(
        default=False, description="Failure outside the closed-protocol setting, e.g. an unregistered exchange"
    )


class PropertyReport(BaseModel):
    players: int
    max_curious: int
    include_traitors: bool
    runs: int
    skipped: int
    violations: list[PropertyViolation] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(violation.boundary for violation in self.violations)
