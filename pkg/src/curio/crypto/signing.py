"""Keyed digests used to blind documents before they are compared."""

from __future__ import annotations

import hmac
from hashlib import sha256

from ..models import Document, PlayerId, Signature, SigningKey


def _seed_bytes(seed: int) -> bytes:
    return seed.to_bytes(8, "big")


def derive_signing_key(seed: int, player_id: PlayerId) -> SigningKey:
    """Return the deterministic signing key of a player for a scenario seed."""

    secret = hmac.new(_seed_bytes(seed), f"signing-key:{player_id}".encode("utf-8"), sha256).digest()
    return SigningKey(key_id=player_id, secret=secret)


def _signed_message(document: Document) -> bytes:
    # Length prefix keeps (content, id) pairs unambiguous.
    return len(document.content).to_bytes(8, "big") + document.content + document.id.encode("utf-8")


def sign(document: Document, key: SigningKey) -> Signature:
    """Blind a document: same (key, document) always yields the same digest."""

    digest = hmac.new(key.secret, _signed_message(document), sha256).digest()
    return Signature(digest=digest, signer=key.key_id, doc_id=document.id)


def signatures_equal(a: Signature, b: Signature) -> bool:
    """Compare two signatures by digest only."""

    return hmac.compare_digest(a.digest, b.digest)
