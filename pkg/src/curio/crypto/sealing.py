"""Simulated public-key sealing.

The payload is the canonical encoding of the enclosed parcel masked with a
keystream bound to the recipient. Only the recipient check guards opening.
"""

from __future__ import annotations

import hmac
from hashlib import sha256

from ..errors import CurioError
from ..models import Parcel, PlayerId, SealedEnvelope

_SEAL_DOMAIN = b"curio-seal"


class SealingError(CurioError):
    """Base class for envelope errors."""


class NotRecipient(SealingError):
    """Raised when someone other than the addressee opens an envelope."""


class TamperedEnvelope(SealingError):
    """Raised when the payload no longer matches the enclosed parcel."""


def _keystream(recipient: PlayerId, length: int) -> bytes:
    key = hmac.new(_SEAL_DOMAIN, f"recipient:{recipient}".encode("utf-8"), sha256).digest()
    blocks = [
        hmac.new(key, counter.to_bytes(8, "big"), sha256).digest()
        for counter in range((length + 31) // 32)
    ]
    return b"".join(blocks)[:length]


def _field(value: bytes) -> bytes:
    return len(value).to_bytes(4, "big") + value


def _plaintext(parcel: Parcel) -> bytes:
    signature = parcel.signature
    parts = [
        _field(signature.digest),
        _field(str(signature.signer).encode("utf-8")),
        _field(signature.doc_id.encode("utf-8")),
    ]
    if parcel.document is not None:
        parts.append(_field(parcel.document.content))
    return b"".join(parts)


def _mask(data: bytes, recipient: PlayerId) -> bytes:
    return bytes(a ^ b for a, b in zip(data, _keystream(recipient, len(data))))


def seal(inner: Parcel, recipient: PlayerId, *, sender: PlayerId | None = None) -> SealedEnvelope:
    """Enclose a parcel for one recipient."""

    payload = _mask(_plaintext(inner), recipient)
    return SealedEnvelope(sender=sender, recipient=recipient, payload=payload, inner=inner)


def open_envelope(envelope: SealedEnvelope, who: PlayerId) -> Parcel:
    """Return the enclosed parcel when opened by its recipient."""

    if who != envelope.recipient:
        raise NotRecipient(f"player {who} cannot open an envelope addressed to {envelope.recipient}")
    if _mask(envelope.payload, who) != _plaintext(envelope.inner):
        raise TamperedEnvelope(f"envelope for player {who} does not match its parcel")
    return envelope.inner
