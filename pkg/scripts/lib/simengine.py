"""Discrete-event simulation of the edge station, its clients and the
shared multicast link.

Clients stream files one segment at a time. Cache hits are served at once;
misses go to the station queue, where they are coded with a queued request
when possible. The station transmits one (possibly coded) payload at a time.
"""

import heapq
import logging
from dataclasses import dataclass
from typing import List, NamedTuple, Optional

from . import cachecore, codingengine, render, schema, workload
from .cachecore import ClientCache, FutureIndex, GlobalStats
from .codingengine import PendingRequest, RequestQueue
from .schema import SegmentId

logger = logging.getLogger(__name__)

# Event kinds, in tie-break order at equal timestamps.
TX_COMPLETE = 0
SEGMENT_REQUEST = 1
WAIT_EXPIRED = 2

STATION = -1

WAITING = "waiting"
REQUESTING = "requesting"
RECEIVING = "receiving"
IDLE = "idle"


class EngineFault(schema.EdgecodeError):
    """The event loop reached a state the model forbids."""


class Event(NamedTuple):
    time: float
    kind: int
    client: int
    seq: int


@dataclass
class ClientState:
    client: int
    cache: ClientCache
    entries: List[schema.ProfileEntry]
    future: Optional[FutureIndex] = None
    file_pos: int = -1
    segment_index: int = 0
    mode: str = WAITING
    pending: Optional[SegmentId] = None
    request_time: float = 0.0

    def current_segment(self) -> SegmentId:
        return SegmentId(self.entries[self.file_pos].file_id, self.segment_index)


@dataclass
class InFlight:
    request: PendingRequest
    start: float
    end: float
    payload_bytes: int


class StationState:
    def __init__(self):
        self.queue = RequestQueue()
        self.tx: Optional[InFlight] = None
        self.stats = GlobalStats()


class Simulation:
    """One run over a shared profile. Call run(), or step() for audits."""

    def __init__(self, config: schema.SimConfig, profile: schema.RequestProfile, catalog: schema.Catalog):
        if config.n_clients < 1 or config.link_rate <= 0 or config.horizon <= 0:
            raise EngineFault("n_clients, link_rate and horizon must be positive")
        if profile.n_clients < config.n_clients:
            raise workload.ProfileMismatchError(
                f"profile has {profile.n_clients} clients, run needs {config.n_clients}")
        workload.check_profile_matches(profile, catalog)

        self.config = config
        self.catalog = catalog
        self.station = StationState()
        self.result = schema.SimResult()
        self.now = 0.0
        self._events: List[Event] = []
        self._seq = 0

        capacity = int(config.cache_fraction * catalog.total_bytes)
        self.clients: List[ClientState] = []
        for c in range(config.n_clients):
            future = None
            if config.policy == "belady":
                future = FutureIndex(workload.future_segment_sequence(profile, catalog, c))
            state = ClientState(
                client=c,
                cache=ClientCache(c, capacity, config.policy),
                entries=profile.clients[c],
                future=future,
            )
            self.clients.append(state)
            if state.entries:
                self._schedule(state.entries[0].wait, WAIT_EXPIRED, c)
            else:
                self._go_idle(state)

    # -- event plumbing ----------------------------------------------------

    def _schedule(self, time: float, kind: int, client: int):
        heapq.heappush(self._events, Event(time, kind, client, self._seq))
        self._seq += 1

    def step(self) -> bool:
        """Process one event. False once the horizon is passed or nothing is left."""
        if not self._events:
            return False
        event = heapq.heappop(self._events)
        if event.time > self.config.horizon:
            self._events.clear()
            return False
        if event.time < self.now:
            raise EngineFault(f"event at t={event.time} processed after t={self.now}")
        self.now = event.time

        if event.kind == TX_COMPLETE:
            self.on_tx_complete(event.time)
        elif event.kind == SEGMENT_REQUEST:
            self.on_segment_request(self.clients[event.client], event.time)
        else:
            self.on_wait_expired(self.clients[event.client], event.time)

        if self.config.check_invariants and self.station.queue and self.station.tx is None:
            raise EngineFault(f"channel idle with {len(self.station.queue)} queued request(s)")
        return True

    def run(self) -> schema.SimResult:
        while self.step():
            pass
        if self.config.check_invariants:
            self.audit()
        r = self.result
        r.files_started = [st.file_pos + 1 for st in self.clients]
        logger.debug(
            "run policy=%s coding=%s M=%s: %d deliveries (%d hits), %d transmissions, %d B",
            self.config.policy, self.config.coding_enabled, self.config.cache_fraction,
            len(r.deliveries), r.hits, len(r.transmissions), r.tx_bytes)
        return r

    def audit(self):
        """Cross-check caches, holder counts and queue membership."""
        cachecore.check_consistency((c.cache for c in self.clients), self.station.stats)
        queued = [c for r in self.station.queue for c in r.clients]
        if len(queued) != len(set(queued)) or set(queued) != self.station.queue.clients:
            raise EngineFault("queue membership out of sync")
        for r in self.station.queue:
            codingengine.check_decodable(r)

    # -- client side ---------------------------------------------------------

    def on_wait_expired(self, st: ClientState, now: float):
        st.file_pos += 1
        st.segment_index = 1
        st.mode = REQUESTING
        self._schedule(now, SEGMENT_REQUEST, st.client)

    def on_segment_request(self, st: ClientState, now: float):
        if st.mode != REQUESTING:
            raise EngineFault(f"client {st.client} requested while {st.mode}")
        s = st.current_segment()
        stats = self.station.stats
        self.result.requests_issued += 1
        stats.record_request(st.client, s, now)
        if st.future is not None:
            st.future.advance(s)

        size = self.catalog.segment_size(s)
        if st.cache.lookup(s):
            self.result.deliveries.append(schema.DeliveryRecord(
                client=st.client, segment=s, size=size,
                request_time=now, delivery_time=now,
                source=schema.SOURCE_CACHE,
            ))
            self._trace_cache(now, st, "hit", s)
            self._advance(st, now)
            return

        self._trace_cache(now, st, "miss", s)
        st.mode = RECEIVING
        st.pending = s
        st.request_time = now
        request = PendingRequest.single(st.client, s, st.cache.contents(), now)
        queue = self.station.queue
        if self.config.coding_enabled:
            placement = codingengine.try_code_or_enqueue(
                queue, request, self.config.require_positive_dof)
            self.result.coding_trace.append(render.coding_trace_line(
                now, placement, codingengine.open_pairs(queue)))
        else:
            queue.append(request)

        if self.station.tx is None:
            self.start_transmission(now)

    def _advance(self, st: ClientState, now: float):
        """Move to the next segment, or wait before the next file."""
        spec = self.catalog.file(st.entries[st.file_pos].file_id)
        if st.segment_index < spec.n_segments:
            st.segment_index += 1
            st.mode = REQUESTING
            self._schedule(now, SEGMENT_REQUEST, st.client)
            return
        nxt = st.file_pos + 1
        if nxt < len(st.entries):
            st.mode = WAITING
            self._schedule(now + st.entries[nxt].wait, WAIT_EXPIRED, st.client)
        else:
            self._go_idle(st)

    def _go_idle(self, st: ClientState):
        st.mode = IDLE
        self.result.idle_clients += 1
        logger.debug("client %d exhausted its profile at t=%.3f", st.client, self.now)

    # -- station side --------------------------------------------------------

    def start_transmission(self, now: float):
        if self.station.tx is not None:
            raise EngineFault("transmission started while the link is busy")
        r = codingengine.dequeue_for_transmission(self.station.queue)
        if r is None:
            return
        payload = codingengine.coded_payload_size(r, self.catalog)
        end = now + self.config.backhaul_delay + payload * 8 / self.config.link_rate
        self.station.tx = InFlight(request=r, start=now, end=end, payload_bytes=payload)
        self._schedule(end, TX_COMPLETE, STATION)

    def on_tx_complete(self, now: float):
        tx = self.station.tx
        if tx is None:
            raise EngineFault("transmission completed with an empty buffer")
        self.station.tx = None
        r = tx.request
        self.result.transmissions.append(schema.Transmission(
            start=tx.start, end=now, payload_bytes=tx.payload_bytes, members=r.members))

        stats = self.station.stats
        group = len(r.members)
        for client, s in r.members:
            st = self.clients[client]
            if st.mode != RECEIVING or st.pending != s:
                raise EngineFault(f"client {client} received {s} it is not waiting for")
            if client in self.station.queue.clients:
                raise EngineFault(f"client {client} still queued while receiving {s}")
            size = self.catalog.segment_size(s)
            self.result.deliveries.append(schema.DeliveryRecord(
                client=client, segment=s, size=size,
                request_time=st.request_time, delivery_time=now,
                source=schema.SOURCE_NETWORK,
                payload_bytes=tx.payload_bytes, group_size=group,
            ))
            if st.cache.fits(size):
                evicted = st.cache.insert(s, size, stats, st.future, now)
                for victim in evicted:
                    self._trace_cache(now, st, "evict", victim)
                self._trace_cache(now, st, "insert", s)
                if self.config.check_invariants and st.cache.used > st.cache.capacity:
                    raise EngineFault(f"client {client} cache over capacity")
            elif st.cache.capacity > 0:
                self.result.oversize += 1
                logger.debug("segment %s (%d B) not cached: capacity %d B", s, size, st.cache.capacity)
            st.pending = None
            self._advance(st, now)

        if self.station.queue:
            self.start_transmission(now)

    def _trace_cache(self, now: float, st: ClientState, op: str, s: SegmentId):
        if not self.config.cache_trace:
            return
        keys = cachecore.policy_key(st.cache, self.station.stats, st.future, s)
        self.result.cache_trace.append(render.cache_trace_line(now, st.client, op, s, keys))


def run(config: schema.SimConfig, profile: schema.RequestProfile, catalog: schema.Catalog) -> schema.SimResult:
    return Simulation(config, profile, catalog).run()
