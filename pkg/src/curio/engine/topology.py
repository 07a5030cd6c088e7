"""Communication topology: who observes and can reach whom."""

from __future__ import annotations

from collections import deque
from typing import Mapping, Sequence

from ..models import ClearanceLevel, PlayerId

Adjacency = dict[PlayerId, tuple[PlayerId, ...]]


def default_topology(clearances: Sequence[ClearanceLevel]) -> Adjacency:
    """Complete graph inside each level plus one liaison edge between adjacent levels.

    The liaison joins the lowest player id of each pair of adjacent non-empty
    levels.
    """

    by_level: dict[ClearanceLevel, list[PlayerId]] = {}
    for pid, level in enumerate(clearances):
        by_level.setdefault(level, []).append(pid)

    edges: set[tuple[PlayerId, PlayerId]] = set()
    for members in by_level.values():
        edges.update((a, b) for a in members for b in members if a < b)
    occupied = [by_level[level] for level in ClearanceLevel if level in by_level]
    for lower, upper in zip(occupied, occupied[1:]):
        edges.add((min(lower[0], upper[0]), max(lower[0], upper[0])))
    return _adjacency(len(clearances), edges)


def normalize(raw: Mapping[PlayerId, Sequence[PlayerId]], player_count: int) -> Adjacency:
    """Symmetric adjacency over every player, self-loops dropped."""

    edges = {
        (min(a, b), max(a, b))
        for a, neighbours in raw.items()
        for b in neighbours
        if a != b
    }
    return _adjacency(player_count, edges)


def _adjacency(player_count: int, edges: set[tuple[PlayerId, PlayerId]]) -> Adjacency:
    neighbours: dict[PlayerId, set[PlayerId]] = {pid: set() for pid in range(player_count)}
    for a, b in edges:
        neighbours[a].add(b)
        neighbours[b].add(a)
    return {pid: tuple(sorted(linked)) for pid, linked in neighbours.items()}


def is_connected(adjacency: Adjacency) -> bool:
    if not adjacency:
        return True
    start = min(adjacency)
    seen = {start}
    queue = deque([start])
    while queue:
        for nxt in adjacency[queue.popleft()]:
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return len(seen) == len(adjacency)
