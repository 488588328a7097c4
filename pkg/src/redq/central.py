"""Centralized-buffer model: first-come first-served with redundant requests.

A batch of ``r`` jobs is served once ``k`` of them complete on distinct
servers; the remaining siblings are removed at that moment. Queued siblings
vanish for free, in-service siblings put their server into a cooldown drawn
from the removal-cost law.
"""
from __future__ import annotations

from collections import deque
from typing import Callable

from .engine import ARRIVAL, COMPLETION, COOLDOWN_END, Engine
from .errors import CompletionOnNonBusyServer, InvalidRequestDegree

IDLE, BUSY, COOLDOWN = 0, 1, 2
MODE_NAMES = {IDLE: "idle", BUSY: "busy", COOLDOWN: "cooldown"}

TRACE_COLUMNS = ["event_seq", "time", "kind", "server_id", "batch_id", "buffer_len", "in_system"]


class Batch:
    __slots__ = (
        "id", "arrival", "k", "r", "unassigned", "completed", "touched",
        "serving", "eligible", "departed", "started", "started_on", "queued_at",
    )

    def __init__(self, id, arrival, k, r, eligible=None):
        self.id = id
        self.arrival = arrival
        self.k = k
        self.r = r
        self.unassigned = r  # jobs not yet placed on a server
        self.completed = 0
        self.touched = set()  # servers that served or are serving a job of this batch
        self.serving = []
        self.eligible = eligible
        self.departed = False
        self.started = 0
        self.started_on = []  # servers in the order their jobs entered service
        self.queued_at = None

    @property
    def outstanding(self):
        return 0 if self.departed else self.unassigned + len(self.serving)

    def __repr__(self):
        return f"Batch({self.id}, t={self.arrival:g}, done={self.completed}/{self.k}, r={self.r})"


class QueueModel:
    """State and bookkeeping shared by both buffer modes.

    ``service`` and ``removal`` map a server id to a fresh duration. The
    model is driven by :meth:`handle_event`, one engine event at a time.
    """

    kind = "central"

    def __init__(
        self,
        n: int,
        k: int,
        service: Callable[[int], float],
        removal: Callable[[int], float] | None = None,
        engine: Engine | None = None,
        *,
        record_servers: bool = False,
        trace: bool = False,
    ):
        if k < 1 or n < k:
            raise ValueError(f"need 1 <= k <= n, got n={n}, k={k}")
        self.n = n
        self.k = k
        self.service = service
        self.removal = removal
        self.engine = engine if engine is not None else Engine()
        self.mode = [IDLE] * n
        self.job = [None] * n
        self.job_index = [0] * n
        self.handle = [None] * n
        self.cooldown_until = [0.0] * n
        self.n_idle = n
        self.arrivals = 0
        self.departures = 0
        self.departure_arrival = []  # arrival times, in departure order
        self.departure_time = []
        self.departed_servers = [] if record_servers else None
        self.record_servers = record_servers
        self._occ_time = [0.0]
        self._last_t = 0.0
        self.cooldowns_started = 0
        self.trace_rows = [] if trace else None
        self.on_assign = None  # optional callback(server, batch), for auditing

    # -- events -----------------------------------------------------------------

    @property
    def in_system(self):
        return self.arrivals - self.departures

    def _advance(self, now):
        level = self.arrivals - self.departures
        occ = self._occ_time
        while len(occ) <= level:
            occ.append(0.0)
        occ[level] += now - self._last_t
        self._last_t = now

    def handle_event(self, ev):
        self._advance(ev.time)
        kind = ev.kind
        if kind == COMPLETION:
            batch = self.on_service_completion(ev.target)
            server, bid = ev.target, batch.id
        elif kind == ARRIVAL:
            batch = ev.target
            self.on_arrival(batch)
            server, bid = None, batch.id
        elif kind == COOLDOWN_END:
            self.on_cooldown_end(ev.target)
            server, bid = ev.target, None
        else:
            raise ValueError(f"unknown event kind {kind!r}")
        if self.trace_rows is not None:
            self.trace_rows.append(self._trace_row(ev, server, bid))

    def _trace_row(self, ev, server, bid):
        return [self.engine.dispatched, ev.time, ev.kind, server, bid, self.buffer_len(), self.in_system]

    def close(self, now):
        self._advance(now)

    def occupancy_time(self):
        return list(self._occ_time)

    # -- server primitives ----------------------------------------------------------

    def _start(self, s, batch, label=None):
        if self.mode[s] == IDLE:
            self.n_idle -= 1
        self.mode[s] = BUSY
        self.job[s] = batch
        batch.touched.add(s)
        batch.serving.append(s)
        batch.unassigned -= 1
        self.job_index[s] = batch.started if label is None else label
        batch.started += 1
        batch.started_on.append(s)
        if self.on_assign is not None:
            self.on_assign(s, batch)
        self.handle[s] = self.engine.schedule(self.engine.now + self.service(s), COMPLETION, s)

    def _set_idle(self, s):
        if self.mode[s] != IDLE:
            self.n_idle += 1
        self.mode[s] = IDLE
        self.job[s] = None
        self.handle[s] = None

    def on_service_completion(self, s):
        batch = self.job[s]
        if self.mode[s] != BUSY or batch is None:
            raise CompletionOnNonBusyServer(f"server {s} completed while {MODE_NAMES[self.mode[s]]}")
        batch.serving.remove(s)
        batch.completed += 1
        self._set_idle(s)
        freed = [s]
        if batch.completed == batch.k:
            self._depart(batch)
            now = self.engine.now
            for s2 in batch.serving:
                self.engine.cancel(self.handle[s2])
                cost = self.removal(s2) if self.removal is not None else 0.0
                if cost > 0.0:
                    self.mode[s2] = COOLDOWN
                    self.job[s2] = None
                    self.handle[s2] = None
                    self.cooldown_until[s2] = now + cost
                    self.cooldowns_started += 1
                    self.engine.schedule(now + cost, COOLDOWN_END, s2)
                else:
                    self._set_idle(s2)
                    freed.append(s2)
            batch.serving = []
            self._drop_queued(batch)
            freed.sort()
        for f in freed:
            self._refill(f)
        return batch

    def on_cooldown_end(self, s):
        if self.mode[s] != COOLDOWN:
            raise CompletionOnNonBusyServer(f"cooldown ended on server {s} not cooling down")
        self._set_idle(s)
        self._refill(s)

    def _depart(self, batch):
        batch.departed = True
        self.departures += 1
        self.departure_arrival.append(batch.arrival)
        self.departure_time.append(self.engine.now)
        if self.record_servers:
            self.departed_servers.append((batch.id, list(batch.started_on)))

    # -- policy hooks -------------------------------------------------------------

    def on_arrival(self, batch):
        raise NotImplementedError

    def _refill(self, s):
        raise NotImplementedError

    def _drop_queued(self, batch):
        raise NotImplementedError

    def buffer_len(self):
        raise NotImplementedError

    def snapshot(self):
        raise NotImplementedError


class CentralizedQueue(QueueModel):
    """Common infinite FIFO buffer shared by all servers."""

    kind = "central"

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.buffer = deque()

    def check_degree(self, batch):
        limit = len(batch.eligible) if batch.eligible is not None else self.n
        if batch.r < batch.k or batch.r > limit:
            raise InvalidRequestDegree(
                f"batch {batch.id}: request degree {batch.r} outside [{batch.k}, {limit}]"
            )

    def on_arrival(self, batch):
        self.check_degree(batch)
        self.arrivals += 1
        if self.n_idle:
            mode = self.mode
            elig = batch.eligible
            for s in range(self.n):
                if mode[s] == IDLE and (elig is None or s in elig):
                    self._start(s, batch)
                    if not batch.unassigned:
                        break
        if batch.unassigned:
            self.buffer.append(batch)

    def _refill(self, s):
        buf = self.buffer
        while buf and not buf[0].unassigned:
            buf.popleft()
        for batch in buf:
            if batch.unassigned and s not in batch.touched and (
                batch.eligible is None or s in batch.eligible
            ):
                self._start(s, batch)
                return

    def _drop_queued(self, batch):
        # queued siblings vanish at no cost
        batch.unassigned = 0

    def buffer_len(self):
        return sum(1 for b in self.buffer if b.unassigned)

    def waiting_jobs(self):
        return [(b.id, b.unassigned) for b in self.buffer if b.unassigned]

    def snapshot(self):
        servers = []
        for s in range(self.n):
            if self.mode[s] == BUSY:
                servers.append((self.job[s].id, self.job_index[s]))
            elif self.mode[s] == COOLDOWN:
                servers.append("cooldown")
            else:
                servers.append(None)
        return {"servers": servers, "buffer": self.waiting_jobs()}
