"""Grand-designer registry of transfers and document headers."""

from .schemas import EntryKind, RegistryEntry
from .service import (
    Registry,
    RegistryError,
    RoundOutOfOrder,
    SelfTransfer,
    make_pretext,
    pretext_document,
)

__all__ = [
    "EntryKind",
    "Registry",
    "RegistryEntry",
    "RegistryError",
    "RoundOutOfOrder",
    "SelfTransfer",
    "make_pretext",
    "pretext_document",
]
