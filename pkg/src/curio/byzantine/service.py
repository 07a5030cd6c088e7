"""Oral-messages Byzantine agreement OM(m).

The commander sends its value to every lieutenant; with m > 0 each
lieutenant then acts as commander of OM(m-1) towards the others, and every
lieutenant decides by strict majority over what it heard directly and what
was relayed. Traitors are modelled as strategies that rewrite each outgoing
value given the incoming message and the destination.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from collections import Counter
from itertools import combinations, product
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from pydantic import TypeAdapter, ValidationError

from ..config import get_settings
from ..errors import CurioError
from ..models import GRAND_DESIGNER, PlayerId
from ..protocols.schemas import Outcome, Verdict
from ..streams import stream
from .schemas import (
    BAConfig,
    BAMessage,
    BATraitorStrategy,
    BAViolation,
    BroadcastOutcome,
    Ratification,
)

logger = logging.getLogger(__name__)

TraitorStrategy = Callable[[BAMessage, PlayerId], bytes]

BINARY_DOMAIN: tuple[bytes, bytes] = (b"0", b"1")

_VERDICTS = TypeAdapter(list[Verdict])


class EmptyInput(CurioError):
    """Raised when a majority is requested over no values."""


def majority(values: Sequence[bytes], default: bytes) -> bytes:
    """Strict-majority value, or ``default`` when no value has one."""

    if not values:
        raise EmptyInput("majority of an empty multiset")
    value, count = Counter(values).most_common(1)[0]
    if count * 2 > len(values):
        return value
    return default


class _OralMessages:
    def __init__(self, strategies: Mapping[PlayerId, TraitorStrategy], default: bytes) -> None:
        self._strategies = strategies
        self._default = default
        self.messages = 0

    def _send(self, sender: PlayerId, destination: PlayerId, value: bytes, path: tuple[PlayerId, ...]) -> bytes:
        self.messages += 1
        strategy = self._strategies.get(sender)
        if strategy is None:
            return value
        return strategy(BAMessage(path=path, value=value), destination)

    def run(
        self,
        m: int,
        commander: PlayerId,
        value: bytes,
        lieutenants: tuple[PlayerId, ...],
        path: tuple[PlayerId, ...],
    ) -> dict[PlayerId, bytes]:
        route = (*path, commander)
        received = {lieutenant: self._send(commander, lieutenant, value, route) for lieutenant in lieutenants}
        if m == 0:
            return received

        heard: dict[PlayerId, list[bytes]] = {lieutenant: [received[lieutenant]] for lieutenant in lieutenants}
        for relay in lieutenants:
            others = tuple(lieutenant for lieutenant in lieutenants if lieutenant != relay)
            for lieutenant, relayed in self.run(m - 1, relay, received[relay], others, route).items():
                heard[lieutenant].append(relayed)
        return {lieutenant: majority(heard[lieutenant], self._default) for lieutenant in lieutenants}


def om_broadcast(
    cfg: BAConfig,
    value: bytes,
    traitor_strategies: Mapping[PlayerId, TraitorStrategy],
    *,
    default: bytes = BINARY_DOMAIN[0],
) -> BroadcastOutcome:
    """Run OM(cfg.m) and return the decision of every loyal participant.

    A loyal commander decides its own value. With n >= 3m+1 and at most m
    traitors all loyal decisions agree; degenerate configurations still
    return decisions, without that guarantee.
    """

    engine = _OralMessages(traitor_strategies, default)
    received = engine.run(cfg.m, cfg.commander, value, cfg.lieutenants, ())
    decisions = {pid: decided for pid, decided in received.items() if pid not in traitor_strategies}
    if cfg.commander not in traitor_strategies:
        decisions[cfg.commander] = value
    return BroadcastOutcome(decisions=dict(sorted(decisions.items())), messages=engine.messages)


def om_message_count(n: int, m: int) -> int:
    """Closed form of the messages OM(m) sends among n participants."""

    return sum(math.prod(max(n - i, 0) for i in range(1, depth + 2)) for depth in range(m + 1))


def honest() -> TraitorStrategy:
    return lambda message, destination: message.value


def constant(value: bytes) -> TraitorStrategy:
    return lambda message, destination: value


def equivocate(alternative: bytes) -> TraitorStrategy:
    """Even-numbered destinations get ``alternative``, the rest the true value."""

    return lambda message, destination: alternative if destination % 2 == 0 else message.value


def table_strategy(table: Mapping[tuple[bytes, PlayerId], bytes]) -> TraitorStrategy:
    """Strategy given as an explicit (incoming value, destination) -> value table."""

    return lambda message, destination: table.get((message.value, destination), message.value)


def random_strategy(seed: int, domain: Sequence[bytes]) -> TraitorStrategy:
    """Deterministic pseudo-random strategy that may depend on the relay path."""

    def choose(message: BAMessage, destination: PlayerId) -> bytes:
        digest = hashlib.sha256(
            f"{seed}|{message.path}|{destination}|".encode("utf-8") + message.value
        ).digest()
        return domain[digest[0] % len(domain)]

    return choose


def enumerate_table_strategies(
    domain: Sequence[bytes], destinations: Iterable[PlayerId]
) -> Iterator[dict[tuple[bytes, PlayerId], bytes]]:
    """Every table from (incoming value, destination) to an outgoing value."""

    keys = [(incoming, destination) for incoming in domain for destination in destinations]
    for outgoing in product(domain, repeat=len(keys)):
        yield dict(zip(keys, outgoing))


def build_traitor_strategy(kind: BATraitorStrategy, default: bytes) -> TraitorStrategy:
    if kind is BATraitorStrategy.HONEST:
        return honest()
    if kind is BATraitorStrategy.WHITEWASH:
        return constant(default)
    return equivocate(default)


def _evaluate(
    cfg: BAConfig,
    value: bytes,
    strategies: Mapping[PlayerId, TraitorStrategy],
    default: bytes,
) -> BAViolation | None:
    outcome = om_broadcast(cfg, value, strategies, default=default)
    if len(set(outcome.decisions.values())) <= 1:
        return None
    loyal_commander = cfg.commander not in strategies
    return BAViolation(
        kind="validity" if loyal_commander else "agreement",
        commander=cfg.commander,
        commander_value=value,
        traitors=tuple(sorted(strategies)),
        decisions=outcome.decisions,
    )


def check_agreement_exhaustive(
    n: int, m: int, *, domain: Sequence[bytes] = BINARY_DOMAIN, default: bytes | None = None
) -> list[BAViolation]:
    """Run OM(m) against every table strategy for every set of m traitors.

    Player 0 commands; traitor sets that contain it cover a faulty commander.
    """

    fallback = domain[0] if default is None else default
    participants = tuple(range(n))
    cfg = BAConfig(n=n, m=m, commander=0)
    violations: list[BAViolation] = []
    for traitors in combinations(participants, m):
        tables = [
            list(enumerate_table_strategies(domain, [pid for pid in participants if pid != traitor]))
            for traitor in traitors
        ]
        for value in domain:
            for chosen in product(*tables):
                strategies = {traitor: table_strategy(table) for traitor, table in zip(traitors, chosen)}
                violation = _evaluate(cfg, value, strategies, fallback)
                if violation is not None:
                    violations.append(violation)
    return violations


def check_agreement_sampled(
    n: int,
    m: int,
    samples: int | None,
    seed: int,
    *,
    domain: Sequence[bytes] = BINARY_DOMAIN,
    default: bytes | None = None,
) -> list[BAViolation]:
    """Run OM(m) against ``samples`` random traitor sets and strategies.

    ``samples=None`` takes the configured ``ba_sample_count``.
    """

    if samples is None:
        samples = get_settings().ba_sample_count
    fallback = domain[0] if default is None else default
    rng = stream(seed, "ba-sample", n, m)
    participants = list(range(n))
    cfg = BAConfig(n=n, m=m, commander=0)
    violations: list[BAViolation] = []
    for _ in range(samples):
        traitors = sorted(rng.sample(participants, m))
        value = rng.choice(list(domain))
        strategies = {traitor: random_strategy(rng.getrandbits(64), domain) for traitor in traitors}
        violation = _evaluate(cfg, value, strategies, fallback)
        if violation is not None:
            violations.append(violation)
    return violations


def encode_verdicts(verdicts: Sequence[Verdict]) -> bytes:
    payload = [verdict.model_dump(mode="json") for verdict in sorted(verdicts, key=lambda v: v.player)]
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")


def all_loyal(verdicts: Sequence[Verdict]) -> list[Verdict]:
    """The "retreat" vector: every player judged loyal."""

    return [Verdict(player=v.player, outcome=Outcome.LOYAL, round=v.round) for v in verdicts]


def ratify_verdicts(
    verdicts: Sequence[Verdict],
    players: Iterable[PlayerId],
    m: int,
    *,
    traitors: Iterable[PlayerId] = (),
    strategy: BATraitorStrategy = BATraitorStrategy.WHITEWASH,
) -> Ratification:
    """Broadcast the verdict vector from the grand designer via OM(m)."""

    value = encode_verdicts(verdicts)
    default = encode_verdicts(all_loyal(verdicts))
    lieutenants = tuple(sorted(players))
    traitor_ids = sorted(set(traitors))
    cfg = BAConfig(n=len(lieutenants) + 1, m=m, commander=GRAND_DESIGNER, lieutenants=lieutenants)
    strategies = {traitor: build_traitor_strategy(strategy, default) for traitor in traitor_ids}
    outcome = om_broadcast(cfg, value, strategies, default=default)

    decisions = {pid: decided for pid, decided in outcome.decisions.items() if pid != GRAND_DESIGNER}
    agreed = len(set(decisions.values())) <= 1
    chosen = decisions[min(decisions)] if decisions else value
    bound_exceeded = len(traitor_ids) > m
    if not agreed:
        logger.warning(
            "loyal players disagree on the verdict vector",
            extra={"ctx_traitors": len(traitor_ids), "ctx_m": m},
        )
    try:
        agreed_verdicts = _VERDICTS.validate_json(chosen)
    except ValidationError:
        logger.warning("decided verdict vector is malformed; using the default vector")
        agreed_verdicts = all_loyal(verdicts)
    return Ratification(
        verdicts=agreed_verdicts,
        agreed=agreed,
        messages=outcome.messages,
        bound_exceeded=bound_exceeded,
    )
