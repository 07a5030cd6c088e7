"""Player behaviour strategies."""

from .schemas import (
    Action,
    AuthorAction,
    DenyAction,
    DirectoryEntry,
    ExchangeAction,
    GrantAction,
    HoldingView,
    ObservableState,
    PendingRequest,
    RequestAction,
    RetainAction,
    ScheduledDocument,
)
from .service import concealed, curious_step, loyal_step, step, traitor_collude_step

__all__ = [
    "Action",
    "AuthorAction",
    "DenyAction",
    "DirectoryEntry",
    "ExchangeAction",
    "GrantAction",
    "HoldingView",
    "ObservableState",
    "PendingRequest",
    "RequestAction",
    "RetainAction",
    "ScheduledDocument",
    "concealed",
    "curious_step",
    "loyal_step",
    "step",
    "traitor_collude_step",
]
