"""Client segment caches with LRU, LFU, Belady and LFU-Index eviction.

Recency, frequency and holder counts live in one GlobalStats registry owned
by the edge station; each ClientCache only knows which segments it holds.
Every policy is a key function minimized over the resident set, with the
canonical SegmentId order as the final tie-break.
"""

import bisect
import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from . import schema
from .schema import SegmentId

logger = logging.getLogger(__name__)

NEVER = math.inf


class OversizeSegmentError(schema.EdgecodeError):
    """A segment is larger than the whole cache."""


class OrderingFault(schema.EdgecodeError):
    """A request was recorded earlier than one already recorded."""


class EmptyCacheFault(schema.EdgecodeError):
    """Victim selection on an empty cache."""


class CacheStateFault(schema.EdgecodeError):
    """Capacity or holder-count bookkeeping drifted."""


@dataclass(frozen=True)
class SegmentRecord:
    """Metadata of one segment as seen from one client's cache."""
    segment: SegmentId
    last_local_request: float
    local_count: int
    last_global_request: float
    global_count: int
    holders: int


class GlobalStats:
    """Request recency/frequency per segment and per (client, segment), plus
    how many caches hold each segment."""

    def __init__(self):
        self.last_global: Dict[SegmentId, float] = {}
        self.global_count: Dict[SegmentId, int] = {}
        self.holders: Dict[SegmentId, int] = {}
        self.last_local: Dict[Tuple[int, SegmentId], float] = {}
        self.local_count: Dict[Tuple[int, SegmentId], int] = {}
        self.clock = -math.inf

    def record_request(self, client: int, s: SegmentId, now: float):
        if now < self.clock:
            raise OrderingFault(f"request for {s} at t={now} after t={self.clock}")
        self.clock = now
        key = (client, s)
        self.last_local[key] = now
        self.local_count[key] = self.local_count.get(key, 0) + 1
        self.last_global[s] = now
        self.global_count[s] = self.global_count.get(s, 0) + 1

    def add_holder(self, s: SegmentId):
        self.holders[s] = self.holders.get(s, 0) + 1

    def remove_holder(self, s: SegmentId):
        count = self.holders.get(s, 0)
        if count <= 0:
            raise CacheStateFault(f"holder count for {s} would go negative")
        if count == 1:
            del self.holders[s]
        else:
            self.holders[s] = count - 1

    def record(self, client: int, s: SegmentId) -> SegmentRecord:
        key = (client, s)
        return SegmentRecord(
            segment=s,
            last_local_request=self.last_local.get(key, 0.0),
            local_count=self.local_count.get(key, 0),
            last_global_request=self.last_global.get(s, 0.0),
            global_count=self.global_count.get(s, 0),
            holders=self.holders.get(s, 0),
        )


class FutureIndex:
    """A client's full request sequence with a cursor at the next request.

    next_use() answers "when is this segment requested again" in O(log n).
    """

    def __init__(self, sequence: Sequence[SegmentId]):
        self.sequence = list(sequence)
        self.positions: Dict[SegmentId, List[int]] = {}
        for pos, s in enumerate(self.sequence):
            self.positions.setdefault(s, []).append(pos)
        self.cursor = 0

    def advance(self, s: Optional[SegmentId] = None):
        """Consume the request at the cursor."""
        if s is not None and self.cursor < len(self.sequence) and self.sequence[self.cursor] != s:
            raise OrderingFault(
                f"request for {s} does not match future position {self.cursor} "
                f"({self.sequence[self.cursor]})")
        self.cursor += 1

    def next_use(self, s: SegmentId) -> float:
        positions = self.positions.get(s)
        if not positions:
            return NEVER
        i = bisect.bisect_left(positions, self.cursor)
        return positions[i] if i < len(positions) else NEVER


class ClientCache:
    """One client's byte-bounded segment cache."""

    def __init__(self, client: int, capacity: int, policy: str):
        if policy not in schema.POLICIES:
            raise ValueError(f"unknown policy {policy!r}")
        self.client = client
        self.capacity = int(capacity)
        self.policy = policy
        self.resident: Dict[SegmentId, int] = {}
        self.used = 0

    def __len__(self) -> int:
        return len(self.resident)

    def __contains__(self, s: SegmentId) -> bool:
        return s in self.resident

    def lookup(self, s: SegmentId) -> bool:
        return s in self.resident

    def fits(self, size: int) -> bool:
        return size <= self.capacity

    def contents(self) -> frozenset:
        return frozenset(self.resident)

    def insert(
        self,
        s: SegmentId,
        size: int,
        stats: GlobalStats,
        future: Optional[FutureIndex] = None,
        now: float = 0.0,
    ) -> List[SegmentId]:
        """Evict until s fits, then cache it. Returns victims in eviction order."""
        if size > self.capacity:
            raise OversizeSegmentError(
                f"segment {s} ({size} B) exceeds cache capacity {self.capacity} B")
        if s in self.resident:
            raise CacheStateFault(f"segment {s} already cached by client {self.client}")

        evicted = []
        while self.capacity - self.used < size:
            victim = select_victim(self, stats, future)
            self.evict(victim, stats)
            evicted.append(victim)

        self.resident[s] = size
        self.used += size
        stats.add_holder(s)
        return evicted

    def evict(self, s: SegmentId, stats: GlobalStats):
        self.used -= self.resident.pop(s)
        stats.remove_holder(s)


def _require_residents(cache: ClientCache):
    if not cache.resident:
        raise EmptyCacheFault(f"client {cache.client}: no segment to evict")


def lru_key(cache: ClientCache, stats: GlobalStats, s: SegmentId) -> tuple:
    return (stats.last_global.get(s, 0.0), s)


def lfu_key(cache: ClientCache, stats: GlobalStats, s: SegmentId) -> tuple:
    return (stats.global_count.get(s, 0), stats.last_global.get(s, 0.0), s)


def lfu_index_key(cache: ClientCache, stats: GlobalStats, s: SegmentId) -> tuple:
    # Least-requested first; among those the most replicated; then the oldest local request.
    return (
        stats.global_count.get(s, 0),
        -stats.holders.get(s, 0),
        stats.last_local.get((cache.client, s), 0.0),
        s,
    )


def belady_key(future: FutureIndex, s: SegmentId) -> tuple:
    return (-future.next_use(s), s)


def select_victim_lru(cache: ClientCache, stats: GlobalStats) -> SegmentId:
    _require_residents(cache)
    return min(cache.resident, key=lambda s: lru_key(cache, stats, s))


def select_victim_lfu(cache: ClientCache, stats: GlobalStats) -> SegmentId:
    _require_residents(cache)
    return min(cache.resident, key=lambda s: lfu_key(cache, stats, s))


def select_victim_belady(cache: ClientCache, future: FutureIndex) -> SegmentId:
    _require_residents(cache)
    return min(cache.resident, key=lambda s: belady_key(future, s))


def select_victim_lfu_index(cache: ClientCache, stats: GlobalStats) -> SegmentId:
    _require_residents(cache)
    return min(cache.resident, key=lambda s: lfu_index_key(cache, stats, s))


STATS_POLICIES: Dict[str, Callable[[ClientCache, GlobalStats], SegmentId]] = {
    "lru": select_victim_lru,
    "lfu": select_victim_lfu,
    "lfu-index": select_victim_lfu_index,
}


def select_victim(cache: ClientCache, stats: GlobalStats, future: Optional[FutureIndex]) -> SegmentId:
    if cache.policy == "belady":
        if future is None:
            raise ValueError("belady eviction needs the client's future request sequence")
        return select_victim_belady(cache, future)
    return STATS_POLICIES[cache.policy](cache, stats)


def policy_key(cache: ClientCache, stats: GlobalStats, future: Optional[FutureIndex], s: SegmentId) -> tuple:
    """The policy's ranking values for s, without the SegmentId tie-break."""
    if cache.policy == "belady":
        return (future.next_use(s) if future is not None else NEVER,)
    if cache.policy == "lru":
        return lru_key(cache, stats, s)[:-1]
    if cache.policy == "lfu":
        return lfu_key(cache, stats, s)[:-1]
    return lfu_index_key(cache, stats, s)[:-1]


def check_consistency(caches: Iterable[ClientCache], stats: GlobalStats):
    """Raise CacheStateFault unless capacity and holder counts are exact."""
    counted: Dict[SegmentId, int] = {}
    for cache in caches:
        if cache.used > cache.capacity:
            raise CacheStateFault(f"client {cache.client}: {cache.used} B used > {cache.capacity} B")
        if cache.used != sum(cache.resident.values()):
            raise CacheStateFault(f"client {cache.client}: used bytes out of sync")
        for s in cache.resident:
            counted[s] = counted.get(s, 0) + 1
    if counted != stats.holders:
        drift = sorted(set(counted.items()) ^ set(stats.holders.items()))[:3]
        raise CacheStateFault(f"holder counts drifted: {drift}")
