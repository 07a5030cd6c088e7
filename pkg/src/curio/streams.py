"""Seeded pseudo-random streams split from a scenario seed."""

from __future__ import annotations

import hashlib
import random


def derive_seed(seed: int, *labels: object) -> int:
    """Return a 64-bit seed for the stream named by ``labels``."""

    digest = hashlib.sha256()
    digest.update(seed.to_bytes(8, "big"))
    for label in labels:
        digest.update(b"/")
        digest.update(str(label).encode("utf-8"))
    return int.from_bytes(digest.digest()[:8], "big")


def stream(seed: int, *labels: object) -> random.Random:
    """Independent generator for one (seed, labels) pair."""

    return random.Random(derive_seed(seed, *labels))
