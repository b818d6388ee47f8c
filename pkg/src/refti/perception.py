"""Bounded contest memory and sign-of-record assessments."""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass
from typing import AbstractSet, Iterable, Iterator, Optional


@dataclass(frozen=True)
class ContestRecord:
    time: int
    first: int
    second: int
    winner: Optional[int] = None

    def __post_init__(self):
        if self.first == self.second:
            raise ValueError("a contest needs two distinct players")
        if self.winner is not None and self.winner not in (self.first, self.second):
            raise ValueError(f"winner {self.winner} did not take part in the contest")

    @property
    def loser(self) -> Optional[int]:
        if self.winner is None:
            return None
        return self.second if self.winner == self.first else self.first

    def involves(self, player: int) -> bool:
        return player == self.first or player == self.second


class MemoryStore:
    """First-in-first-out record buffer; ``capacity=None`` means unlimited.

    Without an ``owner`` all records share one budget.  With an ``owner``
    the owner's own contests and observed third-party contests each get
    their own ``capacity`` slots; iteration merges both in time order.
    """

    def __init__(
        self,
        capacity: Optional[int] = None,
        records: Iterable[ContestRecord] = (),
        owner: Optional[int] = None,
    ):
        if capacity is not None and capacity < 1:
            raise ValueError(f"memory capacity must be positive, got {capacity}")
        self.capacity = capacity
        self.owner = owner
        self._own: deque[ContestRecord] = deque(maxlen=capacity)
        self._seen: deque[ContestRecord] = deque(maxlen=capacity)
        self._last_time = -1
        for record in records:
            self.push(record)

    def push(self, record: ContestRecord) -> None:
        if record.time <= self._last_time:
            raise ValueError("records must arrive in strictly increasing time order")
        self._last_time = record.time
        if self.owner is None or record.involves(self.owner):
            self._own.append(record)  # deque(maxlen) drops the oldest
        else:
            self._seen.append(record)

    def clear(self) -> None:
        self._own.clear()
        self._seen.clear()
        self._last_time = -1

    @property
    def own_records(self) -> list:
        return list(self._own)

    @property
    def observed_records(self) -> list:
        return list(self._seen)

    def __iter__(self) -> Iterator[ContestRecord]:
        if not self._seen:
            return iter(self._own)
        return iter(heapq.merge(self._own, self._seen, key=lambda r: r.time))

    def __len__(self) -> int:
        return len(self._own) + len(self._seen)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MemoryStore):
            return NotImplemented
        return (self.capacity, self.owner, list(self)) == (other.capacity, other.owner, list(other))

    def __repr__(self) -> str:
        return f"MemoryStore(capacity={self.capacity}, owner={self.owner}, records={list(self)!r})"


def sign_of(r) -> int:
    if r > 0:
        return 1
    if r < 0:
        return -1
    return 0


def is_visible(record: ContestRecord, observer: int, reference_set: AbstractSet[int]) -> bool:
    return (
        record.involves(observer)
        or record.first in reference_set
        or record.second in reference_set
    )


def observe(
    store: MemoryStore,
    record: ContestRecord,
    observer: int,
    reference_set: AbstractSet[int] = frozenset(),
) -> MemoryStore:
    """Offer a finished contest to ``observer``'s memory.

    The record is kept only when it has a winner and the observer either
    fought in it or knows at least one of the two contestants.
    """
    if record.winner is not None and is_visible(record, observer, reference_set):
        store.push(record)
    return store


def pair_assessment(store: MemoryStore, b: int, a: int) -> int:
    """Relative rank of ``b`` to ``a`` from remembered contests between them.

    +1 when ``b`` has more wins than losses against ``a``, -1 for the
    reverse, 0 on a tie, when no contest is remembered, or when ``a == b``.
    """
    if a == b:
        return 0
    tally = 0
    for record in store:
        if record.winner == b and record.loser == a:
            tally += 1
        elif record.winner == a and record.loser == b:
            tally -= 1
    return sign_of(tally)


def direct_assessment(store: MemoryStore, self_id: int, opponent: int) -> int:
    """+1 if the opponent looks stronger than ``self_id``, -1 if weaker."""
    return pair_assessment(store, opponent, self_id)
