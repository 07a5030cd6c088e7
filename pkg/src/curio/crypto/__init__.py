"""Simulated cryptographic primitives: blinding signatures and sealed envelopes."""

from ..models import SealedEnvelope, Signature, SigningKey
from .sealing import NotRecipient, TamperedEnvelope, open_envelope, seal
from .signing import derive_signing_key, sign, signatures_equal

__all__ = [
    "NotRecipient",
    "SealedEnvelope",
    "Signature",
    "SigningKey",
    "TamperedEnvelope",
    "derive_signing_key",
    "open_envelope",
    "seal",
    "sign",
    "signatures_equal",
]
