"""Byzantine agreement used to ratify loyalty verdicts."""

from .schemas import BAConfig, BAMessage, BATraitorStrategy, BAViolation, BroadcastOutcome, Ratification
from .service import (
    EmptyInput,
    check_agreement_exhaustive,
    check_agreement_sampled,
    majority,
    om_broadcast,
    om_message_count,
    ratify_verdicts,
)

__all__ = [
    "BAConfig",
    "BAMessage",
    "BATraitorStrategy",
    "BAViolation",
    "BroadcastOutcome",
    "EmptyInput",
    "Ratification",
    "check_agreement_exhaustive",
    "check_agreement_sampled",
    "majority",
    "om_broadcast",
    "om_message_count",
    "ratify_verdicts",
]
