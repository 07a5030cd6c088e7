"""Transfer protocols and the loyalty check.

Only the schemas are re-exported here; import `curio.protocols.service`
for the protocol operations.
"""

from .schemas import (
    Delivery,
    Disclosure,
    Evidence,
    EvidenceKind,
    Outcome,
    SweepResult,
    TransferRequest,
    Verdict,
)

__all__ = [
    "Delivery",
    "Disclosure",
    "Evidence",
    "EvidenceKind",
    "Outcome",
    "SweepResult",
    "TransferRequest",
    "Verdict",
]
