"""The edge station's request queue and XOR index-coding placement.

A queued request carries the segments its members want (W) and the segments
all of its members hold (H). Two requests code together when each one's
wants are covered by the other's holdings; the merged request wants the
union and holds the intersection, so chained merges stay decodable.
"""

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Tuple

import networkx as nx

from . import schema
from .schema import SegmentId


class MergeFault(schema.EdgecodeError):
    """Attempt to merge requests that are not codeable."""


class DecodeFault(schema.EdgecodeError):
    """A member could not decode its segment from a coded payload."""


class QueueFault(schema.EdgecodeError):
    """A client appears in more than one queued request."""


@dataclass
class PendingRequest:
    wants: FrozenSet[SegmentId]
    has: FrozenSet[SegmentId]
    members: Tuple[Tuple[int, SegmentId], ...]
    enqueue_time: float
    # Each member's own cache snapshot, used for the decode check.
    member_has: Dict[int, FrozenSet[SegmentId]] = field(default_factory=dict)

    @classmethod
    def single(cls, client: int, wanted: SegmentId, has: FrozenSet[SegmentId], now: float) -> "PendingRequest":
        if wanted in has:
            raise DecodeFault(f"client {client} requested {wanted}, which it already caches")
        return cls(
            wants=frozenset((wanted,)),
            has=frozenset(has),
            members=((client, wanted),),
            enqueue_time=now,
            member_has={client: frozenset(has)},
        )

    @property
    def clients(self) -> Tuple[int, ...]:
        return tuple(c for c, _ in self.members)


def dof(r: PendingRequest) -> int:
    return len(r.has)


def doe(r: PendingRequest) -> int:
    return len(r.wants)


def codeable(r_i: PendingRequest, r_j: PendingRequest) -> bool:
    return r_i.wants <= r_j.has and r_j.wants <= r_i.has


def merge(r_i: PendingRequest, r_j: PendingRequest) -> PendingRequest:
    if set(r_i.clients) & set(r_j.clients):
        raise MergeFault("requests share a member client")
    if not codeable(r_i, r_j):
        raise MergeFault("requests are not codeable")
    member_has = dict(r_i.member_has)
    member_has.update(r_j.member_has)
    merged = PendingRequest(
        wants=r_i.wants | r_j.wants,
        has=r_i.has & r_j.has,
        members=tuple(sorted(r_i.members + r_j.members)),
        enqueue_time=min(r_i.enqueue_time, r_j.enqueue_time),
        member_has=member_has,
    )
    check_decodable(merged)
    return merged


def check_decodable(r: PendingRequest):
    """Every member must hold every other wanted segment of the group."""
    for client, wanted in r.members:
        own = r.member_has.get(client)
        if own is None:
            raise DecodeFault(f"no cache snapshot for member client {client}")
        missing = (r.wants - {wanted}) - own
        if missing:
            raise DecodeFault(
                f"client {client} cannot decode {wanted}: lacks {sorted(map(str, missing))}")


@dataclass
class Placement:
    action: str  # merge | append
    position: int
    request: PendingRequest


class RequestQueue:
    """FIFO of pending (possibly merged) requests."""

    def __init__(self):
        self.entries: List[PendingRequest] = []
        self.clients: set = set()

    def __len__(self) -> int:
        return len(self.entries)

    def __bool__(self) -> bool:
        return bool(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def _claim(self, r: PendingRequest):
        clash = self.clients.intersection(r.clients)
        if clash:
            raise QueueFault(f"client(s) {sorted(clash)} already have a queued request")
        self.clients.update(r.clients)

    def append(self, r: PendingRequest) -> Placement:
        self._claim(r)
        self.entries.append(r)
        return Placement("append", len(self.entries) - 1, r)

    def replace(self, position: int, r: PendingRequest, incoming: PendingRequest) -> Placement:
        self._claim(incoming)
        self.entries[position] = r
        return Placement("merge", position, r)

    def popleft(self) -> PendingRequest:
        r = self.entries.pop(0)
        self.clients.difference_update(r.clients)
        return r


def select_partner(queue: RequestQueue, incoming: PendingRequest) -> Optional[int]:
    """Queue position giving the largest merged DOF, then the smallest merged
    DOE, then the earliest position; None if nothing is codeable."""
    best_pos = None
    best_dof = -1
    best_doe = 0
    for pos, r_j in enumerate(queue.entries):
        if not codeable(incoming, r_j):
            continue
        merged_dof = len(incoming.has & r_j.has)
        merged_doe = len(incoming.wants | r_j.wants)
        if merged_dof > best_dof or (merged_dof == best_dof and merged_doe < best_doe):
            best_pos, best_dof, best_doe = pos, merged_dof, merged_doe
    return best_pos


def try_code_or_enqueue(
    queue: RequestQueue,
    incoming: PendingRequest,
    require_positive_dof: bool = False,
) -> Placement:
    """Merge the incoming request into its best codeable partner in place, or
    append it at the tail."""
    pos = select_partner(queue, incoming)
    if pos is not None:
        merged = merge(queue.entries[pos], incoming)
        if dof(merged) > 0 or not require_positive_dof:
            return queue.replace(pos, merged, incoming)
    return queue.append(incoming)


def dequeue_for_transmission(queue: RequestQueue) -> Optional[PendingRequest]:
    """Head of the queue, or None when the channel should idle."""
    if not queue:
        return None
    r = queue.popleft()
    check_decodable(r)
    return r


def coded_payload_size(r: PendingRequest, catalog: schema.Catalog) -> int:
    """XOR of unequal segments pads to the longest one."""
    return max(catalog.segment_size(s) for s in r.wants)


def side_information_graph(queue: RequestQueue) -> nx.DiGraph:
    """Edge u -> v when the holdings of entry u cover the wants of entry v."""
    g = nx.DiGraph()
    g.add_nodes_from(range(len(queue.entries)))
    for u, r_u in enumerate(queue.entries):
        for v, r_v in enumerate(queue.entries):
            if u != v and r_v.wants <= r_u.has:
                g.add_edge(u, v)
    return g


def open_pairs(queue: RequestQueue) -> int:
    """Codeable pairs still sitting in the queue (mutual side information)."""
    if len(queue) < 2:
        return 0
    return side_information_graph(queue).to_undirected(reciprocal=True).number_of_edges()
