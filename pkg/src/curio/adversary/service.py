"""Behaviour strategies: loyal, curious and colluding-traitor players.

Every step function is pure. It reads an :class:`ObservableState`, the
round and the run seed, and returns the actions the engine executes.
"""

from __future__ import annotations

from typing import Callable

from ..models import (
    BehaviorTag,
    ConcealPolicy,
    DocumentHeader,
    DocumentId,
    Player,
    PlayerId,
    dominates,
)
from ..streams import stream
from .schemas import (
    Action,
    AuthorAction,
    DenyAction,
    ExchangeAction,
    GrantAction,
    ObservableState,
    PendingRequest,
    RequestAction,
    RetainAction,
)

StepFunction = Callable[[ObservableState, int, int], list[Action]]


def _author(view: ObservableState) -> list[Action]:
    actions: list[Action] = []
    for scheduled in view.schedule:
        share_with = tuple(
            pid
            for pid in sorted(scheduled.need_to_know)
            if pid != view.player and pid in view.roster and dominates(view.roster[pid], scheduled.level)
        )
        actions.append(
            AuthorAction(level=scheduled.level, need_to_know=scheduled.need_to_know, share_with=share_with)
        )
    return actions


def _respond(view: ObservableState, request: PendingRequest, seed: int) -> Action:
    header = _own_header(view, request.doc_id)
    if header is None or not dominates(request.requester_clearance, header.level):
        return DenyAction(requester=request.requester, doc_id=request.doc_id)
    if request.requester in header.need_to_know:
        return GrantAction(requester=request.requester, doc_id=request.doc_id)
    if view.trust.verify_need_to_know:
        return DenyAction(requester=request.requester, doc_id=request.doc_id)
    rng = stream(seed, "trust", view.player, request.requester, request.doc_id, view.round)
    if rng.random() < view.trust.grant_probability:
        return GrantAction(requester=request.requester, doc_id=request.doc_id)
    return DenyAction(requester=request.requester, doc_id=request.doc_id)


def _own_header(view: ObservableState, doc_id: DocumentId) -> DocumentHeader | None:
    for holding in view.holdings:
        if holding.full and holding.header.id == doc_id:
            return holding.header
    return None


def _respond_all(view: ObservableState, seed: int) -> list[Action]:
    inbox = sorted(view.inbox, key=lambda request: (request.requester, request.doc_id))
    return [_respond(view, request, seed) for request in inbox]


def _out_of_reach(view: ObservableState, header: DocumentHeader) -> bool:
    """A document the player may not know about but is cleared to read."""

    return (
        view.player not in header.need_to_know
        and header.origin != view.player
        and dominates(view.clearance, header.level)
    )


def _requests(view: ObservableState, *, retry_denied: bool) -> list[Action]:
    rate = view.behavior.params.request_rate
    if rate == 0:
        return []
    denied_docs = {doc_id for doc_id, _ in view.denials}
    candidates: list[tuple[int, DocumentId, PlayerId]] = []
    for entry in view.directory:
        doc_id = entry.header.id
        if not _out_of_reach(view, entry.header):
            continue
        if view.holds(doc_id) or doc_id in view.outstanding or (doc_id, entry.holder) in view.denials:
            continue
        priority = 0 if retry_denied and doc_id in denied_docs else 1
        candidates.append((priority, doc_id, entry.holder))

    chosen: list[Action] = []
    requested: set[DocumentId] = set()
    for _, doc_id, holder in sorted(candidates):
        if doc_id in requested:
            continue
        requested.add(doc_id)
        chosen.append(RequestAction(holder=holder, doc_id=doc_id))
        if len(chosen) == rate:
            break
    return chosen


def loyal_step(view: ObservableState, round: int, seed: int) -> list[Action]:
    """Author on schedule, share within need-to-know, answer requests."""

    return [*_author(view), *_respond_all(view, seed)]


def curious_step(view: ObservableState, round: int, seed: int) -> list[Action]:
    """Behave like a loyal player while collecting out-of-need-to-know documents."""

    actions = [*_author(view), *_respond_all(view, seed)]
    if view.observed:
        actions.append(RetainAction(envelopes=view.observed))
    actions.extend(_requests(view, retry_denied=False))
    return actions


def traitor_collude_step(view: ObservableState, round: int, seed: int) -> list[Action]:
    """Pass documents to partners off the books and keep retrying denied requests."""

    actions = [*_author(view), *_respond_all(view, seed)]
    if view.observed:
        actions.append(RetainAction(envelopes=view.observed))

    rate = view.behavior.params.exchange_rate
    full = sorted(
        (holding.header for holding in view.holdings if holding.full), key=lambda header: header.id
    )
    for partner in sorted(set(view.behavior.params.partners) - {view.player}):
        known = view.partner_holdings.get(partner, frozenset())
        passed = 0
        for header in full:
            if passed == rate:
                break
            if header.id in known or header.origin == partner:
                continue
            actions.append(ExchangeAction(partner=partner, doc_id=header.id))
            passed += 1

    actions.extend(_requests(view, retry_denied=True))
    return actions


STEPS: dict[BehaviorTag, StepFunction] = {
    BehaviorTag.LOYAL: loyal_step,
    BehaviorTag.CURIOUS_OVERT: curious_step,
    BehaviorTag.CURIOUS_CONCEALING: curious_step,
    BehaviorTag.TRAITOR_COLLUDING: traitor_collude_step,
}


def step(view: ObservableState, round: int, seed: int) -> list[Action]:
    """Dispatch to the step function of the player's behaviour tag."""

    return STEPS[view.behavior.tag](view, round, seed)


def concealed(player: Player) -> frozenset[bytes]:
    """Digests of transferred items the player leaves out of its disclosure."""

    policy = player.behavior.conceal
    if policy is ConcealPolicy.NOTHING:
        return frozenset()
    hide_out_of_ntk = policy in (
        ConcealPolicy.OUT_OF_NEED_TO_KNOW,
        ConcealPolicy.OFF_BOOK_AND_OUT_OF_NEED_TO_KNOW,
    )
    hide_off_book = policy in (ConcealPolicy.OFF_BOOK, ConcealPolicy.OFF_BOOK_AND_OUT_OF_NEED_TO_KNOW)
    hidden: set[bytes] = set()
    for item in player.info.transferred.values():
        if hide_out_of_ntk and player.id not in item.header.need_to_know:
            hidden.add(item.signature.digest)
        elif hide_off_book and item.header.id in player.off_book:
            hidden.add(item.signature.digest)
    return frozenset(hidden)
